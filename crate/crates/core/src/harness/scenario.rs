//! Scripted tool motion with a tracking-noise model.

use std::path::Path;

use nalgebra::{UnitQuaternion, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::config::EngineConfig;
use crate::engine::Engine;
use crate::fsm::ZoneThresholds;
use crate::geometry::{AnatomicalFrame, Pose};
use crate::io::session::SessionLog;
use crate::plan::{LabeledTarget, TargetPlan};

use super::metrics::{compute_metrics, TrialMetrics};
use super::HarnessError;

/// One scripted tool pose. `tip` is absolute; `offset` is relative to the
/// target's entry point; with neither the tip sits on the entry point.
/// Without `axis` the tool points along the planned direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Keyframe {
    pub t_s: f64,
    #[serde(default)]
    pub tip: Option<[f64; 3]>,
    #[serde(default)]
    pub offset: Option<[f64; 3]>,
    #[serde(default)]
    pub axis: Option<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetScript {
    /// Target label from the plan.
    pub target: String,
    pub keyframes: Vec<Keyframe>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseModel {
    /// Per-axis Gaussian σ on the tip position, mm.
    pub position_sigma_mm: f64,
    /// Per-component Gaussian σ of a rotation vector applied to the tool, degrees.
    pub orientation_sigma_deg: f64,
    pub seed: u64,
}

/// Scenario file contents. Thresholds and tick rate fall back to the engine
/// configuration when omitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub tick_rate_hz: Option<f64>,
    #[serde(default)]
    pub frame: AnatomicalFrame,
    #[serde(default)]
    pub thresholds: Option<ZoneThresholds>,
    pub targets: Vec<LabeledTarget>,
    #[serde(default)]
    pub noise: NoiseModel,
    pub script: Vec<TargetScript>,
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, HarnessError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Io(path.to_owned(), e))?;
        Self::from_toml(&text)
    }

    pub fn plan(&self, config: &EngineConfig) -> TargetPlan {
        TargetPlan {
            frame: self.frame,
            targets: self.targets.clone(),
            thresholds: self.thresholds.unwrap_or(config.thresholds),
        }
    }

    pub fn tick_rate(&self, config: &EngineConfig) -> f64 {
        self.tick_rate_hz.unwrap_or(config.sim.tick_rate_hz)
    }

    pub fn validate(&self, config: &EngineConfig) -> Result<(), HarnessError> {
        let rate = self.tick_rate(config);
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(HarnessError::Scenario(format!("tick rate {rate} must be positive")));
        }
        let n = &self.noise;
        if !(n.position_sigma_mm >= 0.0 && n.orientation_sigma_deg >= 0.0) {
            return Err(HarnessError::Scenario("noise σ must be non-negative".into()));
        }
        let plan = self.plan(config);
        plan.validate()?;
        if self.script.is_empty() {
            return Err(HarnessError::Scenario("script is empty".into()));
        }
        for s in &self.script {
            if plan.index_of(&s.target).is_none() {
                return Err(HarnessError::Scenario(format!(
                    "script names unknown target {:?}",
                    s.target
                )));
            }
            if s.keyframes.is_empty() {
                return Err(HarnessError::Scenario(format!("{}: no keyframes", s.target)));
            }
            let mut last = -f64::INFINITY;
            let mut last_axis: Option<Vector3<f64>> = None;
            for k in &s.keyframes {
                if !(k.t_s.is_finite() && k.t_s >= 0.0 && k.t_s > last) {
                    return Err(HarnessError::Scenario(format!(
                        "{}: keyframe times must be finite, non-negative and increasing",
                        s.target
                    )));
                }
                if k.tip.is_some() && k.offset.is_some() {
                    return Err(HarnessError::Scenario(format!(
                        "{}: keyframe has both tip and offset",
                        s.target
                    )));
                }
                let finite = |v: &Option<[f64; 3]>| v.is_none_or(|a| a.iter().all(|x| x.is_finite()));
                if !(finite(&k.tip) && finite(&k.offset) && finite(&k.axis)) {
                    return Err(HarnessError::Scenario(format!("{}: non-finite keyframe", s.target)));
                }
                if let Some(a) = k.axis {
                    let a = Vector3::from(a);
                    if a.norm() == 0.0 {
                        return Err(HarnessError::Scenario(format!("{}: zero axis", s.target)));
                    }
                    if let Some(prev) = last_axis {
                        if prev.normalize().dot(&a.normalize()) < -0.99 {
                            return Err(HarnessError::Scenario(format!(
                                "{}: consecutive axes nearly opposite",
                                s.target
                            )));
                        }
                    }
                    last_axis = Some(a);
                }
                last = k.t_s;
            }
        }
        Ok(())
    }
}

fn resolve(k: &Keyframe, target: &LabeledTarget) -> (Vector3<f64>, Vector3<f64>) {
    let entry = target.trajectory.entry_point;
    let tip = match (k.tip, k.offset) {
        (Some(t), _) => Vector3::from(t),
        (None, Some(o)) => entry + Vector3::from(o),
        (None, None) => entry,
    };
    let axis = k
        .axis
        .map_or(target.trajectory.direction, |a| Vector3::from(a).normalize());
    (tip, axis)
}

/// Noise-free pose at `t` seconds into a target script: linear tip
/// interpolation and normalized-linear axis interpolation, held constant
/// outside the keyframe range.
pub fn scripted_pose(script: &TargetScript, target: &LabeledTarget, t: f64) -> Pose {
    let ks = &script.keyframes;
    let i = ks.partition_point(|k| k.t_s <= t);
    let (tip, axis) = if i == 0 {
        resolve(&ks[0], target)
    } else if i == ks.len() {
        resolve(&ks[ks.len() - 1], target)
    } else {
        let (a, b) = (&ks[i - 1], &ks[i]);
        let u = (t - a.t_s) / (b.t_s - a.t_s);
        let (ta, aa) = resolve(a, target);
        let (tb, ab) = resolve(b, target);
        (ta.lerp(&tb, u), aa.lerp(&ab, u).normalize())
    };
    Pose::from_tip_and_axis(tip, axis)
}

struct Jitter {
    rng: ChaCha8Rng,
    pos: Normal<f64>,
    rot: Normal<f64>,
}

impl Jitter {
    fn new(n: &NoiseModel) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(n.seed),
            pos: Normal::new(0.0, n.position_sigma_mm).expect("σ validated"),
            rot: Normal::new(0.0, n.orientation_sigma_deg.to_radians()).expect("σ validated"),
        }
    }

    fn apply(&mut self, pose: &Pose) -> Pose {
        let dp = Vector3::from_fn(|_, _| self.pos.sample(&mut self.rng));
        let dr = Vector3::from_fn(|_, _| self.rot.sample(&mut self.rng));
        Pose::new(
            pose.position + dp,
            UnitQuaternion::from_scaled_axis(dr) * pose.orientation,
        )
    }
}

/// Steps the engine over the noisy script, target by target, at the tick
/// rate. Timestamps are `tick_index / rate`.
pub fn run_scenario(
    scenario: &Scenario,
    config: &EngineConfig,
) -> Result<(SessionLog, Vec<TrialMetrics>), HarnessError> {
    scenario.validate(config)?;
    let plan = scenario.plan(config);
    let rate = scenario.tick_rate(config);
    let mut engine = Engine::new(plan.clone(), config.mapping.clone())?;
    let mut log = SessionLog::new(engine.session_header(rate));
    let mut jitter = Jitter::new(&scenario.noise);
    let mut tick: u64 = 0;
    for script in &scenario.script {
        let id = plan.index_of(&script.target).expect("validated");
        let target = &plan.targets[id];
        let duration = script.keyframes.last().expect("validated").t_s;
        let count = (duration * rate + 1e-9).floor() as u64 + 1;
        for k in 0..count {
            let pose = jitter.apply(&scripted_pose(script, target, k as f64 / rate));
            let record = engine.tick(tick as f64 / rate, &pose, id)?;
            log.records.push(record);
            tick += 1;
        }
    }
    let metrics = compute_metrics(&log, config.sim.dwell_s);
    Ok((log, metrics))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fsm::{Phase, TransitionEvent};

    const SCENARIO: &str = r#"
        tick_rate_hz = 50.0

        [[targets]]
        label = "T1"
        trajectory = { entry_point = [0.0, 0.0, 0.0], direction = [0.1, 1.0, 0.2] }

        [[script]]
        target = "T1"
        keyframes = [
            { t_s = 0.0, offset = [30.0, 0.0, 4.0], axis = [0.3, 1.0, -0.1] },
            { t_s = 4.0 },
            { t_s = 6.0 },
        ]
    "#;

    #[test]
    fn noiseless_linear_convergence() {
        let sc = Scenario::from_toml(SCENARIO).unwrap();
        let (log, metrics) = run_scenario(&sc, &EngineConfig::default()).unwrap();
        assert_eq!(log.records.len(), 301);
        assert_eq!(log.records[0].phase, Phase::Initial);
        let last = log.records.last().unwrap();
        assert_eq!(last.phase, Phase::Final);
        assert!(last.error.d < 1e-9 && last.error.theta < 1e-6);
        let forward: Vec<_> = log
            .event_timeline()
            .into_iter()
            .map(|(_, e)| e)
            .filter(|e| e.target_phase().is_some())
            .collect();
        assert_eq!(
            forward,
            vec![
                TransitionEvent::EnterEp,
                TransitionEvent::EpToAp,
                TransitionEvent::ApToFp
            ]
        );
        let m = &metrics[0];
        assert!(m.alignment_time_s.unwrap() > 0.0);
    }

    #[test]
    fn seeded_noise_is_deterministic() {
        let mut sc = Scenario::from_toml(SCENARIO).unwrap();
        sc.noise = NoiseModel {
            position_sigma_mm: 0.3,
            orientation_sigma_deg: 0.0,
            seed: 7,
        };
        let cfg = EngineConfig::default();
        let a = run_scenario(&sc, &cfg).unwrap();
        let b = run_scenario(&sc, &cfg).unwrap();
        assert_eq!(a, b);
        sc.noise.seed = 8;
        assert_ne!(run_scenario(&sc, &cfg).unwrap().0, a.0);
    }

    #[test]
    fn rejects_bad_scripts() {
        let cfg = EngineConfig::default();
        let mut sc = Scenario::from_toml(SCENARIO).unwrap();
        sc.script[0].keyframes[1].t_s = 0.0;
        assert!(sc.validate(&cfg).is_err());
        let mut sc = Scenario::from_toml(SCENARIO).unwrap();
        sc.script[0].target = "nope".into();
        assert!(sc.validate(&cfg).is_err());
        let mut sc = Scenario::from_toml(SCENARIO).unwrap();
        sc.tick_rate_hz = Some(0.0);
        assert!(sc.validate(&cfg).is_err());
    }
}
