//! Randomized sphere-contact suite scoring reconstructed resultants against
//! simulator ground truth.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::pipeline::estimator::ForceEstimator;
use crate::pipeline::sim::{ContactSimulator, MarkerNoise, SpherePose};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteParams {
    pub count: usize,
    /// Marker centroid noise (pixels, standard deviation per axis).
    pub noise_px: f64,
    pub seed: u64,
    /// Indentation depth range (m).
    pub depth_range_m: [f64; 2],
    /// Largest commanded tangential shift (m).
    pub max_shift_m: f64,
    /// Clearance kept between the contact patch and the pad outline (m).
    pub margin_m: f64,
}

impl Default for SuiteParams {
    fn default() -> Self {
        Self {
            count: 50,
            noise_px: 0.1,
            seed: 1,
            depth_range_m: [0.3e-3, 0.8e-3],
            max_shift_m: 0.2e-3,
            margin_m: 2.0e-3,
        }
    }
}

/// Outcome of one simulated contact.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseReport {
    pub case: usize,
    pub pose: SpherePose,
    pub truth: [f64; 3],
    pub estimate: [f64; 3],
    pub valid: bool,
}

impl CaseReport {
    pub fn load_magnitude(&self) -> f64 {
        self.truth.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Per-axis absolute error divided by the ground-truth load magnitude.
    pub fn relative_error(&self) -> [f64; 3] {
        let m = self.load_magnitude();
        std::array::from_fn(|c| (self.estimate[c] - self.truth[c]).abs() / m)
    }

    pub fn worst_relative_error(&self) -> f64 {
        self.relative_error().into_iter().fold(0.0, f64::max)
    }
}

/// Draws a pose for `case`; every case has its own random stream so the
/// suite is reproducible under any execution policy.
pub fn draw_pose(sim: &ContactSimulator<'_>, params: &SuiteParams, case: usize) -> SpherePose {
    let mut rng = StdRng::seed_from_u64(case_seed(params.seed, case, 0));
    let [lo, hi] = params.depth_range_m;
    let depth = if hi > lo {
        rng.random_range(lo..hi)
    } else {
        lo
    };
    let r = sim.indenter_radius();
    let a = (depth * (2.0 * r - depth)).sqrt();
    let clear = a + params.margin_m;
    let b = sim.bounds();
    let center = loop {
        let c = [
            rng.random_range(b.min[0]..b.max[0]),
            rng.random_range(b.min[1]..b.max[1]),
        ];
        let ring = (0..16).all(|k| {
            let th = k as f64 * std::f64::consts::TAU / 16.0;
            sim.covers([c[0] + clear * th.cos(), c[1] + clear * th.sin()])
        });
        if ring {
            break c;
        }
    };
    let angle = rng.random_range(0.0..std::f64::consts::TAU);
    let mag = rng.random_range(0.0..=params.max_shift_m);
    SpherePose {
        center_m: center,
        depth_m: depth,
        shift_m: [mag * angle.cos(), mag * angle.sin()],
    }
}

fn case_seed(seed: u64, case: usize, stream: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ (case as u64).wrapping_mul(0xD1B5_4A32_D192_ED03)
        ^ stream.wrapping_mul(0x94D0_49BB_1331_11EB)
}

/// Simulates `params.count` contacts, runs the estimator on each and
/// reports the resultants.
pub fn sphere_suite(
    estimator: &ForceEstimator,
    sim: &ContactSimulator<'_>,
    params: &SuiteParams,
    exec: Execution,
) -> Result<Vec<CaseReport>> {
    if !(params.noise_px >= 0.0) || params.depth_range_m[0] <= 0.0 {
        return Err(Error::invalid("noise must be >= 0 and depths positive"));
    }
    let sigma = params.noise_px * sim.pixel_frame().pitch_m;
    exec.map_range(params.count, |case| {
        let pose = draw_pose(sim, params, case);
        let noise = (sigma > 0.0).then(|| MarkerNoise {
            sigma_m: sigma,
            seed: case_seed(params.seed, case, 1),
        });
        let contact = sim.simulate_contact(&pose, noise)?;
        let result = estimator.process_frame(
            &contact.reference,
            &contact.current,
            Some(&contact.contact_mask),
            case as f64,
        );
        Ok(CaseReport {
            case,
            pose,
            truth: contact.resultant,
            estimate: result.resultant,
            valid: result.valid,
        })
    })
    .into_iter()
    .collect()
}
