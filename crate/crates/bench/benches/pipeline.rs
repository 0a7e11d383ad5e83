use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use ndarray::Array2;
use rand::Rng;
use wavelocate::dispersion::{solve_rayleigh_lamb, FrequencyGrid, Mode, PlateMaterial};
use wavelocate::mdn::{batch_loss_and_gradient, ForwardMode, Network, NetworkSpec};
use wavelocate::mfp::{ModelBank, QueryGrid};
use wavelocate::rng::{stream, tag};
use wavelocate::wavefield::{random_sensors, Excitation, Plate, Point, WaveModel};

fn desk_model() -> WaveModel {
    let grid = FrequencyGrid::symmetric(256, 500e3).unwrap();
    let table = solve_rayleigh_lamb(&PlateMaterial::default(), grid, &[Mode::S0, Mode::A0]).unwrap();
    WaveModel::new(table, Excitation::Impulse).unwrap()
}

fn dispersion(c: &mut Criterion) {
    let grid = FrequencyGrid::symmetric(256, 500e3).unwrap();
    c.bench_function("solve_rayleigh_lamb Q=256", |b| {
        b.iter(|| solve_rayleigh_lamb(&PlateMaterial::default(), grid, &[Mode::S0, Mode::A0]).unwrap())
    });
}

fn synthesis(c: &mut Criterion) {
    let model = desk_model();
    let plate = Plate::default();
    let sensors = random_sensors(8, &plate, 1).unwrap();
    let damages = [Point::new(0.3, 0.2), Point::new(0.7, 0.8)];
    c.bench_function("pair_spectra 28 pairs x 2 damages", |b| b.iter(|| model.pair_spectra(&sensors, &damages, 1.05).unwrap()));
}

fn mfp(c: &mut Criterion) {
    let model = desk_model();
    let plate = Plate::default();
    let sensors = random_sensors(8, &plate, 1).unwrap();
    let grid = QueryGrid::new(1.0, 1.0, 50, 50).unwrap();
    let data = model.pair_spectra(&sensors, &[Point::new(0.31, 0.62)], 1.0).unwrap();
    let cached = ModelBank::new(model.clone(), sensors.clone(), grid, usize::MAX).unwrap();
    let streaming = ModelBank::new(model, sensors, grid, 0).unwrap();
    let mut g = c.benchmark_group("ambiguity 50x50");
    g.sample_size(10);
    g.bench_function("cached", |b| b.iter(|| cached.ambiguity(&data).unwrap()));
    g.bench_function("streaming", |b| b.iter(|| streaming.ambiguity(&data).unwrap()));
    g.finish();
}

fn network(c: &mut Criterion) {
    let spec = NetworkSpec::desk(28 * 256);
    let net = Network::init(spec.clone(), &mut stream(1, tag::INIT, 0), [0.5, 0.5], 0.05).unwrap();
    let mut rng = stream(1, tag::TRAIN, 0);
    let x = Array2::from_shape_fn((32, spec.input_dim), |_| rng.random_range(-1.0..1.0));
    let targets: Vec<Vec<Point>> = (0..32).map(|i| vec![Point::new(0.01 * i as f64, 0.5)]).collect();
    let refs: Vec<&[Point]> = targets.iter().map(Vec::as_slice).collect();
    c.bench_function("forward+backward batch 32", |b| {
        b.iter_batched(
            || stream(1, tag::DROPOUT, 0),
            |mut r| batch_loss_and_gradient(&net, x.view(), &refs, ForwardMode::Train(&mut r)).unwrap(),
            BatchSize::SmallInput,
        )
    });
    c.bench_function("infer batch 32", |b| b.iter(|| net.infer(x.view()).unwrap()));
}

criterion_group!(benches, dispersion, synthesis, mfp, network);
criterion_main!(benches);
