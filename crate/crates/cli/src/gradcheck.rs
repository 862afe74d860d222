use drfs::objective::gradcheck::{check_gradient, random_alpha_points, GradcheckInstance, GradcheckReport};
use drfs::objective::{objective_gradient, ObjectiveConfig};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradcheckParams {
    pub populations: usize,
    pub rows: usize,
    pub features: usize,
    pub points: usize,
    pub lo: f64,
    pub hi: f64,
    pub seed: u64,
    pub tolerance: f64,
    pub objective: ObjectiveConfig,
    /// Scales one gradient entry by 1.01 before comparing.
    pub corrupt: bool,
}

impl Default for GradcheckParams {
    fn default() -> Self {
        Self {
            populations: 3,
            rows: 20,
            features: 5,
            points: 10,
            lo: 0.1,
            hi: 5.0,
            seed: 0,
            tolerance: 1e-4,
            objective: ObjectiveConfig {
                mc_samples: 4,
                lambda: 0.1,
                ..Default::default()
            },
            corrupt: false,
        }
    }
}

pub fn run_gradcheck(p: &GradcheckParams) -> Result<GradcheckReport, CliError> {
    if p.populations == 0 || p.rows == 0 || p.features == 0 || p.points == 0 {
        return Err(CliError::Config("populations, rows, features and points must be >= 1".into()));
    }
    if !(p.lo > 0.0 && p.hi >= p.lo) {
        return Err(CliError::Config("need 0 < lo <= hi".into()));
    }
    let inst = GradcheckInstance::random(p.populations, p.rows, p.features, p.seed).map_err(CliError::stage("gradcheck"))?;
    let points = random_alpha_points(p.features, p.points, p.lo, p.hi, p.seed);
    let cfg = &p.objective;
    let epoch = 1;
    check_gradient(
        &inst,
        cfg,
        epoch,
        &points,
        |a| {
            let mut g = objective_gradient(a, &inst.data, &inst.cache, cfg, epoch)?;
            if p.corrupt {
                let d = g.len() / 2;
                g[d] = g[d] * 1.01 + 1e-3;
            }
            Ok(g)
        },
        p.tolerance,
    )
    .map_err(CliError::stage("gradcheck"))
}
