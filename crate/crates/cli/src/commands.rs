//! Subcommand implementations.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::json;
use wavelocate::dispersion::solve_rayleigh_lamb;
use wavelocate::eval::{density_raster, evaluate_mdn, evaluate_mfp, run_sweep, Method, MetricReport, MetricRow};
use wavelocate::mdn::{self, ModelArtifact, TrainingLog};
use wavelocate::mfp::{GridField, ModelBank};
use wavelocate::wavefield::{generate_dataset, read_dataset, write_dataset, Split};

use crate::config::RunConfig;
use crate::error::CliError;

/// Write the resolved configuration into `dir`.
pub fn write_resolved(config: &RunConfig, dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("resolved.json"), serde_json::to_vec_pretty(config)?)?;
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Solve the dispersion relation on the configured grid and write it as CSV.
pub fn cmd_dispersion(config: &RunConfig, out: &Path) -> Result<(), CliError> {
    let material = config.material();
    material.validate()?;
    let grid = config.frequency_grid()?;
    let table = solve_rayleigh_lamb(&material, grid, &config.frequencies.modes)?;
    let dir = out.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    write_resolved(config, dir)?;
    let mut w = create(out)?;
    table.write_csv(&mut w)?;
    w.flush()?;
    println!("modes: {}", table.num_modes());
    println!("bins: {}", table.num_bins());
    Ok(())
}

/// Generate a dataset directory.
pub fn cmd_simulate(config: &RunConfig, out: &Path) -> Result<(), CliError> {
    let seed = config.require_seed()?;
    let scenario = config.scenario(seed)?;
    let dataset = generate_dataset(&scenario, config.counts(), seed)?;
    write_dataset(&dataset, out)?;
    write_resolved(config, out)?;
    for split in Split::ALL {
        let snr = dataset.mean_snr_db(split).map_or_else(|| "infinite".to_string(), |s| format!("{s:.3} dB"));
        println!("{}: {} samples, mean realized SNR {snr}", split.name(), dataset.split(split).len());
    }
    Ok(())
}

fn write_epoch_log(log: &TrainingLog, out: &Path) -> Result<(), CliError> {
    let mut w = create(&out.join("epochs.csv"))?;
    writeln!(w, "epoch,train_nll,val_nll")?;
    for e in &log.epochs {
        let val = e.val_nll.map_or_else(String::new, |v| format!("{v:.10e}"));
        writeln!(w, "{},{:.10e},{val}", e.epoch, e.train_nll)?;
    }
    w.flush()?;
    if !log.folds.is_empty() {
        let mut w = create(&out.join("folds.csv"))?;
        writeln!(w, "dropout_prob,fold,val_nll")?;
        for f in &log.folds {
            writeln!(w, "{},{},{:.10e}", f.dropout_prob, f.fold, f.val_nll)?;
        }
        w.flush()?;
    }
    Ok(())
}

/// Train a network on a dataset directory.
pub fn cmd_train(config: &RunConfig, dataset_dir: &Path, out: &Path, cv3: bool) -> Result<(), CliError> {
    let seed = config.require_seed()?;
    let dataset = read_dataset(dataset_dir)?;
    let expected = config.sensors(seed)?.num_pairs() * config.frequencies.num_points;
    let found = dataset.scenario.signal_len();
    if expected != found {
        return Err(CliError::Config(format!(
            "network input dimension {expected} (sensor pairs x frequency points in the config) does not match the dataset's {found}"
        )));
    }
    let spec = config.network_spec(found)?;
    let train_config = config.train_config(seed)?;
    let model = if cv3 { mdn::train_cv3(&dataset, &spec, &train_config)? } else { mdn::train(&dataset, &spec, &train_config)? };
    model.save(out)?;
    write_epoch_log(&model.log, out)?;
    write_resolved(config, out)?;
    if let Some(last) = model.log.epochs.last() {
        let val = last.val_nll.map_or_else(|| "n/a".to_string(), |v| format!("{v:.4}"));
        println!("epochs: {}, final train nll {:.4}, val nll {val}", last.epoch, last.train_nll);
    }
    for f in &model.log.folds {
        println!("fold {} (dropout {}): held-out nll {:.4}", f.fold, f.dropout_prob, f.val_nll);
    }
    Ok(())
}

fn write_field(field: &GridField, stem: &Path) -> Result<(), CliError> {
    let mut w = create(&stem.with_extension("csv"))?;
    field.write_csv(&mut w)?;
    w.flush()?;
    let mut w = create(&stem.with_extension("pgm"))?;
    field.write_pgm(&mut w)?;
    w.flush()?;
    Ok(())
}

fn write_report(report: &MetricReport, out: &Path) -> Result<(), CliError> {
    let mut w = create(&out.join("report.csv"))?;
    report.write_csv(&mut w)?;
    w.flush()?;
    let mut w = create(&out.join("report.json"))?;
    report.write_json(&mut w)?;
    w.flush()?;
    for r in &report.rows {
        println!(
            "snr {} dB, w_distort {}, {} damage(s), {}: ALE {:.4} m",
            r.snr_db,
            r.w_distort,
            r.num_damages,
            r.method.name(),
            r.ale
        );
    }
    Ok(())
}

/// Where `cmd_eval` reads its inputs from.
pub enum EvalSource {
    /// Evaluate the configured methods on an existing dataset's test split.
    Dataset { dataset: PathBuf, model: Option<PathBuf> },
    /// Run the configured comparison sweep.
    Sweep,
}

pub fn cmd_eval(config: &RunConfig, source: &EvalSource, out: &Path, export_surfaces: usize) -> Result<(), CliError> {
    fs::create_dir_all(out)?;
    let methods = &config.sweep.methods;
    if methods.is_empty() {
        return Err(CliError::Config("sweep.methods must name at least one of mdn, mfp".into()));
    }
    let report = match source {
        EvalSource::Sweep => {
            let seed = config.require_seed()?;
            if export_surfaces > 0 {
                log::warn!("--export-surfaces applies to dataset evaluation only; ignored for sweeps");
            }
            run_sweep(&config.sweep_template(seed)?, &config.sweep_spec()?, seed)?
                .with_provenance(json!({ "config": config, "mode": "sweep" }))
        }
        EvalSource::Dataset { dataset, model } => {
            let ds = read_dataset(dataset)?;
            let model = match (methods.contains(&Method::Mdn), model) {
                (true, Some(dir)) => Some(ModelArtifact::load(dir)?),
                (true, None) => return Err(CliError::Config("evaluating mdn needs --model (or io.model)".into())),
                (false, _) => None,
            };
            let grid = config.query_grid()?;
            let snr = ds.scenario.uncertainty.snr;
            let w = ds.scenario.uncertainty.w_distort;
            let k = ds.scenario.max_damages();
            let surfaces = out.join("surfaces");
            if export_surfaces > 0 {
                fs::create_dir_all(&surfaces)?;
            }
            let mut rows = Vec::new();
            for &method in methods {
                match method {
                    Method::Mfp => {
                        let bank = ModelBank::new(ds.scenario.wave_model()?, ds.scenario.sensors.clone(), grid, config.cache_limit_bytes())?;
                        let (e, fields) = evaluate_mfp(&ds, Split::Test, &bank, export_surfaces)?;
                        for (i, f) in fields.iter().enumerate() {
                            write_field(f, &surfaces.join(format!("mfp_{i:04}")))?;
                        }
                        rows.push(MetricRow::from_eval(snr, w, k, &e));
                    }
                    Method::Mdn => {
                        let m = model.as_ref().expect("model loaded for mdn");
                        let (e, preds) = evaluate_mdn(&ds, Split::Test, m)?;
                        for (i, p) in preds.iter().take(export_surfaces).enumerate() {
                            write_field(&density_raster(p, grid), &surfaces.join(format!("mdn_{i:04}")))?;
                        }
                        rows.push(MetricRow::from_eval(snr, w, k, &e));
                    }
                }
            }
            MetricReport::new(rows).with_provenance(json!({
                "config": config,
                "mode": "dataset",
                "dataset": dataset,
                "model": model.as_ref().map(|_| source_model(source)),
            }))
        }
    };
    write_report(&report, out)?;
    write_resolved(config, out)?;
    Ok(())
}

fn source_model(source: &EvalSource) -> Option<PathBuf> {
    match source {
        EvalSource::Dataset { model, .. } => model.clone(),
        EvalSource::Sweep => None,
    }
}
