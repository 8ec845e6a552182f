//! Cointegration verdicts from the three statistics of each model.

use serde::{Deserialize, Serialize};

use super::design::GhModel;
use super::gh::GhResult;
use crate::inference::Level;

/// A model indicates cointegration when at least `min_rejections` of
/// {ADF, Z_t, Z_alpha} reject at `level`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionRule {
    pub level: Level,
    pub min_rejections: usize,
}

impl Default for DecisionRule {
    fn default() -> Self {
        Self {
            level: Level::Ten,
            min_rejections: 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelVerdict {
    pub model: GhModel,
    /// ADF, Z_t, Z_alpha.
    pub rejects: [bool; 3],
    pub passes: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub verdicts: Vec<ModelVerdict>,
    pub cointegrated: bool,
}

impl Decision {
    pub fn passing(&self) -> Vec<GhModel> {
        self.verdicts.iter().filter(|v| v.passes).map(|v| v.model).collect()
    }

    /// The most general passing model (RST, then RS, LST, LS).
    pub fn representative(&self) -> Option<GhModel> {
        self.passing().into_iter().max()
    }
}

pub fn decide(results: &[GhResult], rule: DecisionRule) -> Decision {
    let verdicts: Vec<ModelVerdict> = results
        .iter()
        .map(|r| {
            let cv = &r.critical_values;
            let rejects = [
                cv.adf.values.rejects(r.adf.statistic, rule.level),
                cv.z_t.values.rejects(r.z_t.statistic, rule.level),
                cv.z_alpha.values.rejects(r.z_alpha.statistic, rule.level),
            ];
            let count = rejects.iter().filter(|b| **b).count();
            ModelVerdict {
                model: r.model,
                rejects,
                passes: count >= rule.min_rejections,
            }
        })
        .collect();
    let cointegrated = verdicts.iter().any(|v| v.passes);
    Decision {
        verdicts,
        cointegrated,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cointegration::gh::{BreakStat, GhCriticalSet};
    use crate::series::MonthIndex;

    fn result(model: GhModel, adf: f64, zt: f64, za: f64) -> GhResult {
        let d = MonthIndex::new(2009, 12).unwrap();
        let b = |s| BreakStat {
            statistic: s,
            position: 90,
            break_date: d,
        };
        GhResult {
            model,
            adf: b(adf),
            adf_lags: 0,
            z_t: b(zt),
            z_alpha: b(za),
            candidate_trace: vec![],
            critical_values: GhCriticalSet::lookup(model, 2).unwrap(),
            m: 2,
            n: 160,
        }
    }

    #[test]
    fn nothing_rejects() {
        let rs: Vec<_> = GhModel::ALL.iter().map(|&m| result(m, -3.0, -3.0, -20.0)).collect();
        let d = decide(&rs, DecisionRule::default());
        assert!(!d.cointegrated);
        assert_eq!(d.representative(), None);
    }

    #[test]
    fn two_of_three_passes() {
        // LST 10% values: ADF/Zt -5.03, Za -48.94
        let d = decide(&[result(GhModel::LST, -5.10, -5.10, -40.0)], DecisionRule::default());
        assert!(d.cointegrated);
        assert_eq!(d.verdicts[0].rejects, [true, true, false]);
    }

    #[test]
    fn single_rejection_is_not_enough() {
        // mirrors an index whose models show only scattered single rejections
        let rs = vec![
            result(GhModel::LS, -3.73, -3.87, -24.8),
            result(GhModel::LST, -4.68, -4.94, -38.8),
            result(GhModel::RS, -5.38, -5.15, -42.0),
            result(GhModel::RST, -5.64, -5.71, -53.9),
        ];
        let d = decide(&rs, DecisionRule::default());
        assert!(!d.cointegrated);
        assert_eq!(d.verdicts[2].rejects, [true, false, false]);
    }

    #[test]
    fn representative_prefers_general_model() {
        let rs = vec![
            result(GhModel::LST, -6.09, -6.19, -56.0),
            result(GhModel::RST, -6.06, -6.12, -56.0),
        ];
        let d = decide(&rs, DecisionRule::default());
        assert_eq!(d.passing(), vec![GhModel::LST, GhModel::RST]);
        assert_eq!(d.representative(), Some(GhModel::RST));
    }
}
