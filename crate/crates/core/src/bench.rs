//! Wall-clock comparison of patch-based and cubical persistence.

use std::time::Instant;

use serde::Serialize;

use crate::alpha::{alpha_filtration, alpha_persistence, AlphaOptions, MAX_CELL_DIM};
use crate::cubical::{cubical_filtration, cubical_persistence};
use crate::error::{Error, Result};
use crate::exec::Parallelism;
use crate::patch::{build_point_cloud_with, PatchConfig};
use crate::volume::{Mask, Volume};

#[derive(Clone, Debug, PartialEq)]
pub struct BenchOptions {
    pub trials: usize,
    /// Count point-cloud construction as part of the patch-based time.
    pub include_pointcloud: bool,
    pub alpha: AlphaOptions,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions {
            trials: 100,
            include_pointcloud: true,
            alpha: AlphaOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MethodTiming {
    pub method: String,
    pub params: String,
    pub n_points: Option<usize>,
    pub d: Option<usize>,
    pub n_cells: usize,
    pub trials: usize,
    pub mean_s: f64,
    pub std_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchReport {
    pub methods: Vec<MethodTiming>,
}

impl BenchReport {
    pub fn get(&self, method: &str) -> Option<&MethodTiming> {
        self.methods.iter().find(|m| m.method == method)
    }
}

/// Mean and population std of `trials` timed runs after one untimed warm-up.
fn time<T>(trials: usize, mut f: impl FnMut() -> Result<T>) -> Result<(f64, f64)> {
    f()?;
    let mut samples = Vec::with_capacity(trials);
    for _ in 0..trials {
        let t = Instant::now();
        std::hint::black_box(f()?);
        samples.push(t.elapsed().as_secs_f64());
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / n;
    Ok((mean, var.sqrt()))
}

/// Times both methods on one volume; measured regions run on one thread.
pub fn bench_ph(
    v: &Volume,
    m: &Mask,
    cfg: &PatchConfig,
    opts: &BenchOptions,
) -> Result<BenchReport> {
    if opts.trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    cfg.validate()?;
    Parallelism::single_threaded(|| {
        let seq = Parallelism::Sequential;
        let pc = build_point_cloud_with(v, m, cfg, seq)?;
        let n_cells = if pc.len() > pc.dim() {
            alpha_filtration(&pc, &opts.alpha)?
                .to_complex(MAX_CELL_DIM)?
                .len()
        } else {
            pc.len()
        };
        let (mean, std) = if opts.include_pointcloud {
            time(opts.trials, || {
                let pc = build_point_cloud_with(v, m, cfg, seq)?;
                alpha_persistence(&pc, &opts.alpha)
            })?
        } else {
            time(opts.trials, || alpha_persistence(&pc, &opts.alpha))?
        };
        let patch = MethodTiming {
            method: "patch".into(),
            params: format!(
                "{cfg}; pointcloud={}",
                if opts.include_pointcloud {
                    "timed"
                } else {
                    "excluded"
                }
            ),
            n_points: Some(pc.len()),
            d: Some(pc.dim()),
            n_cells,
            trials: opts.trials,
            mean_s: mean,
            std_s: std,
        };
        let cubical_cells = cubical_filtration(v, Some(m))?.len();
        let (mean, std) = time(opts.trials, || cubical_persistence(v, Some(m)))?;
        let cubical = MethodTiming {
            method: "cubical".into(),
            params: format!("dims={:?}", v.dims()),
            n_points: None,
            d: None,
            n_cells: cubical_cells,
            trials: opts.trials,
            mean_s: mean,
            std_s: std,
        };
        Ok(BenchReport {
            methods: vec![patch, cubical],
        })
    })
}
