use crate::belief::{observe, Belief, Observation, TableBelief};
use crate::config::RestaurantConfig;
use crate::error::ModelError;
use crate::joint::{action_duration, enumerate_joint_transitions};
use crate::model::{Action, RobotState};

/// Probability mass and per-table satisfaction mass of the outcomes sharing
/// one joint observation.
struct Branch {
    robot: RobotState,
    obs: Vec<Observation>,
    mass: f64,
    satisfaction: Vec<Vec<f64>>,
}

/// Exact depth-limited expectimax over the belief process.
///
/// `V(b, d) = max_a [ E r(b, a) + sum_z P(z | b, a) gamma^dur V(b'_z, d - 1) ]`
/// with `V(., 0) = 0`. Returns the maximizing root action (first in the fixed
/// action order on ties) and its value. A finished restaurant has value 0.
pub fn value_expectimax(
    b: &Belief,
    depth: usize,
    cfg: &RestaurantConfig,
) -> Result<(Action, f64), ModelError> {
    if depth == 0 || b.all_done() {
        return Ok((Action::NO_OP, 0.0));
    }
    let support_size = b.support_size();
    if support_size > cfg.support_cap {
        return Err(ModelError::SupportCapExceeded {
            size: support_size,
            cap: cfg.support_cap,
        });
    }
    let support = b.support();
    let levels = b.tables.first().map_or(0, |t| t.satisfaction.len());

    let mut best: Option<(Action, f64)> = None;
    for a in b.legal_actions(cfg) {
        let duration = action_duration(b.robot, a, cfg);
        let mut immediate = 0.0;
        let mut branches: Vec<Branch> = Vec::new();
        for (js, w) in &support {
            for out in enumerate_joint_transitions(js, a, cfg)? {
                let p = w * out.probability;
                immediate += p * out.reward;
                let obs: Vec<Observation> = out.next.tables.iter().map(|t| observe(t, a)).collect();
                let idx = match branches.iter().position(|br| br.obs == obs) {
                    Some(i) => i,
                    None => {
                        branches.push(Branch {
                            robot: out.next.robot,
                            obs,
                            mass: 0.0,
                            satisfaction: vec![vec![0.0; levels]; b.tables.len()],
                        });
                        branches.len() - 1
                    }
                };
                let br = &mut branches[idx];
                br.mass += p;
                for (i, t) in out.next.tables.iter().enumerate() {
                    br.satisfaction[i][usize::from(t.satisfaction)] += p;
                }
            }
        }

        let mut future = 0.0;
        for br in branches {
            let next = Belief {
                robot: br.robot,
                tables: br
                    .obs
                    .iter()
                    .zip(br.satisfaction)
                    .map(|(z, sat)| TableBelief {
                        observed: *z,
                        satisfaction: sat.into_iter().map(|m| m / br.mass).collect(),
                    })
                    .collect(),
                clock: b.clock + u64::from(duration),
            };
            future += br.mass * value_expectimax(&next, depth - 1, cfg)?.1;
        }
        let value = immediate + cfg.gamma.powi(duration as i32) * future;
        if best.is_none_or(|(_, bv)| value > bv) {
            best = Some((a, value));
        }
    }
    best.ok_or(ModelError::NoLegalActions)
}
