//! Fully connected network with dropout on hidden layers.
//!
//! Parameters live in one flat vector, layer by layer, each layer as its
//! weight matrix (`fan_in × fan_out`, row-major) followed by its bias.

use ndarray::{Array2, ArrayView1, ArrayView2, ArrayViewMut1, ArrayViewMut2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::gmm::raw_len;
use super::MdnError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    #[default]
    Relu,
    Tanh,
}

impl Activation {
    fn apply(self, a: f64) -> f64 {
        match self {
            Activation::Relu => a.max(0.0),
            Activation::Tanh => a.tanh(),
        }
    }

    fn derivative(self, a: f64) -> f64 {
        match self {
            Activation::Relu => {
                if a > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - a.tanh().powi(2),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSpec {
    pub input_dim: usize,
    pub hidden: Vec<usize>,
    pub num_components: usize,
    pub activation: Activation,
    pub dropout_prob: f64,
    /// Lower bound on predicted variances, m².
    pub variance_floor: f64,
}

impl NetworkSpec {
    pub const DESK_HIDDEN: [usize; 3] = [128, 64, 32];
    pub const FULL_HIDDEN: [usize; 3] = [600, 300, 60];

    pub fn desk(input_dim: usize) -> Self {
        Self {
            input_dim,
            hidden: Self::DESK_HIDDEN.to_vec(),
            num_components: 3,
            activation: Activation::Relu,
            dropout_prob: 0.15,
            variance_floor: 1e-6,
        }
    }

    pub fn output_dim(&self) -> usize {
        raw_len(self.num_components)
    }

    pub fn validate(&self) -> Result<(), MdnError> {
        let bad = |m: String| Err(MdnError::InvalidSpec(m));
        if self.input_dim == 0 {
            return bad("input_dim must be positive".into());
        }
        if self.hidden.contains(&0) {
            return bad(format!("hidden layer sizes must be positive, got {:?}", self.hidden));
        }
        if self.num_components == 0 {
            return bad("num_components must be at least 1".into());
        }
        if !(0.0..1.0).contains(&self.dropout_prob) {
            return bad(format!("dropout_prob must lie in [0, 1), got {}", self.dropout_prob));
        }
        if !(self.variance_floor > 0.0 && self.variance_floor.is_finite()) {
            return bad(format!("variance_floor must be positive, got {}", self.variance_floor));
        }
        Ok(())
    }

    /// `(fan_in, fan_out)` of every affine layer, output layer last.
    pub fn layer_dims(&self) -> Vec<(usize, usize)> {
        let mut sizes = vec![self.input_dim];
        sizes.extend(&self.hidden);
        sizes.push(self.output_dim());
        sizes.windows(2).map(|w| (w[0], w[1])).collect()
    }

    pub fn num_params(&self) -> usize {
        self.layer_dims().iter().map(|(i, o)| i * o + o).sum()
    }

    /// Names and shapes of the parameter tensors in storage order.
    pub fn tensors(&self) -> Vec<TensorInfo> {
        let n = self.hidden.len();
        self.layer_dims()
            .iter()
            .enumerate()
            .flat_map(|(l, &(i, o))| {
                let name = if l == n { "out".to_string() } else { format!("hidden{}", l + 1) };
                [
                    TensorInfo { name: format!("{name}.weight"), shape: vec![i, o] },
                    TensorInfo { name: format!("{name}.bias"), shape: vec![o] },
                ]
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TensorInfo {
    pub name: String,
    pub shape: Vec<usize>,
}

impl TensorInfo {
    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub enum ForwardMode<'a, R: Rng + ?Sized> {
    /// Dropout masks drawn from the given stream.
    Train(&'a mut R),
    Infer,
}

/// Intermediate values from a forward pass, kept for backpropagation.
#[derive(Clone, Debug)]
pub struct ForwardCache {
    input: Array2<f64>,
    pre: Vec<Array2<f64>>,
    /// Inverted-dropout multipliers (0 or `1/(1−p)`), train mode only.
    masks: Vec<Option<Array2<f64>>>,
    /// Hidden outputs after activation and dropout.
    hidden: Vec<Array2<f64>>,
}

impl ForwardCache {
    /// Hidden-layer outputs, after activation and any dropout mask.
    pub fn hidden(&self) -> &[Array2<f64>] {
        &self.hidden
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Network {
    spec: NetworkSpec,
    params: Vec<f64>,
    offsets: Vec<(usize, usize, usize, usize)>,
}

fn layer_offsets(spec: &NetworkSpec) -> Vec<(usize, usize, usize, usize)> {
    let mut off = 0;
    spec.layer_dims()
        .into_iter()
        .map(|(i, o)| {
            let entry = (off, i, o, off + i * o);
            off += i * o + o;
            entry
        })
        .collect()
}

impl Network {
    pub fn from_params(spec: NetworkSpec, params: Vec<f64>) -> Result<Self, MdnError> {
        spec.validate()?;
        if params.len() != spec.num_params() {
            return Err(MdnError::LengthMismatch { expected: spec.num_params(), found: params.len() });
        }
        let offsets = layer_offsets(&spec);
        Ok(Self { spec, params, offsets })
    }

    pub fn zeros(spec: NetworkSpec) -> Result<Self, MdnError> {
        let n = spec.num_params();
        Self::from_params(spec, vec![0.0; n])
    }

    /// Weights uniform in `±1/√fan_in`, zero biases; the output bias starts
    /// every component at `mean_bias` with variance `init_variance`.
    pub fn init<R: Rng + ?Sized>(spec: NetworkSpec, rng: &mut R, mean_bias: [f64; 2], init_variance: f64) -> Result<Self, MdnError> {
        let mut net = Self::zeros(spec)?;
        for l in 0..net.offsets.len() {
            let (w0, i, o, _) = net.offsets[l];
            let bound = 1.0 / (i as f64).sqrt();
            for w in &mut net.params[w0..w0 + i * o] {
                *w = rng.random_range(-bound..bound);
            }
        }
        let k = net.spec.num_components;
        let mut bias = net.layer_mut(net.offsets.len() - 1).1;
        for c in 0..k {
            bias[2 * c] = mean_bias[0];
            bias[2 * c + 1] = mean_bias[1];
            bias[2 * k + 2 * c] = init_variance.ln();
            bias[2 * k + 2 * c + 1] = init_variance.ln();
        }
        Ok(net)
    }

    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn into_params(self) -> Vec<f64> {
        self.params
    }

    fn layer(&self, l: usize) -> (ArrayView2<'_, f64>, ArrayView1<'_, f64>) {
        let (w0, i, o, b0) = self.offsets[l];
        let w = ArrayView2::from_shape((i, o), &self.params[w0..w0 + i * o]).expect("layer shape");
        (w, ArrayView1::from(&self.params[b0..b0 + o]))
    }

    fn layer_mut(&mut self, l: usize) -> (ArrayViewMut2<'_, f64>, ArrayViewMut1<'_, f64>) {
        let (w0, i, o, b0) = self.offsets[l];
        let (head, tail) = self.params.split_at_mut(b0);
        let w = ArrayViewMut2::from_shape((i, o), &mut head[w0..w0 + i * o]).expect("layer shape");
        (w, ArrayViewMut1::from(&mut tail[..o]))
    }

    /// Forward pass over a batch (`rows × input_dim`). Returns the raw output
    /// vectors, one row per input.
    pub fn forward<R: Rng + ?Sized>(&self, input: ArrayView2<'_, f64>, mode: ForwardMode<'_, R>) -> Result<(Array2<f64>, ForwardCache), MdnError> {
        if input.ncols() != self.spec.input_dim {
            return Err(MdnError::DimensionMismatch { expected: self.spec.input_dim, found: input.ncols() });
        }
        if input.iter().any(|v| !v.is_finite()) {
            return Err(MdnError::NonFiniteActivation { layer: 0 });
        }
        let mut rng = match mode {
            ForwardMode::Train(r) => Some(r),
            ForwardMode::Infer => None,
        };
        let p = self.spec.dropout_prob;
        let act = self.spec.activation;
        let n_hidden = self.spec.hidden.len();
        let mut cache = ForwardCache { input: input.to_owned(), pre: Vec::new(), masks: Vec::new(), hidden: Vec::new() };
        let mut h = input.to_owned();
        for l in 0..=n_hidden {
            let (w, b) = self.layer(l);
            let mut a = h.dot(&w);
            a += &b;
            if a.iter().any(|v| !v.is_finite()) {
                return Err(MdnError::NonFiniteActivation { layer: l + 1 });
            }
            if l == n_hidden {
                return Ok((a, cache));
            }
            let mut out = a.mapv(|v| act.apply(v));
            let mask = match rng.as_deref_mut() {
                Some(r) if p > 0.0 => {
                    let keep = 1.0 / (1.0 - p);
                    let m = Array2::from_shape_fn(out.raw_dim(), |_| if r.random::<f64>() < p { 0.0 } else { keep });
                    out *= &m;
                    Some(m)
                }
                _ => None,
            };
            cache.pre.push(a);
            cache.masks.push(mask);
            cache.hidden.push(out.clone());
            h = out;
        }
        unreachable!("loop returns at the output layer")
    }

    /// Forward pass without dropout.
    pub fn infer(&self, input: ArrayView2<'_, f64>) -> Result<Array2<f64>, MdnError> {
        self.forward::<crate::rng::StreamRng>(input, ForwardMode::Infer).map(|(z, _)| z)
    }

    /// Parameter gradient given `dz = ∂loss/∂z` for every row of the batch.
    pub fn backward(&self, cache: &ForwardCache, dz: ArrayView2<'_, f64>) -> Result<Vec<f64>, MdnError> {
        let mut grad = vec![0.0; self.params.len()];
        let n_hidden = self.spec.hidden.len();
        let act = self.spec.activation;
        let mut delta = dz.to_owned();
        for l in (0..=n_hidden).rev() {
            let (w0, i, o, b0) = self.offsets[l];
            let below = if l == 0 { &cache.input } else { &cache.hidden[l - 1] };
            let gw = below.t().dot(&delta);
            grad[w0..w0 + i * o].copy_from_slice(gw.as_slice().expect("standard layout"));
            let gb = delta.sum_axis(Axis(0));
            grad[b0..b0 + o].copy_from_slice(gb.as_slice().expect("standard layout"));
            if l == 0 {
                break;
            }
            let (w, _) = self.layer(l);
            let mut d = delta.dot(&w.t());
            let pre = &cache.pre[l - 1];
            d.zip_mut_with(pre, |g, &a| *g *= act.derivative(a));
            if let Some(m) = &cache.masks[l - 1] {
                d *= m;
            }
            delta = d;
        }
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(MdnError::NonFiniteGradient);
        }
        Ok(grad)
    }
}
