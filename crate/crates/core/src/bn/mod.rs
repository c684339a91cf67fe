//! Discrete dynamic Bayesian network over bout windows.

pub mod config;
pub mod cpt;
pub mod dag;
pub mod infer;
pub mod model;
pub mod model_file;
pub mod sample;

pub use config::{BnConfig, Cumulative, MAX_LAG};
pub use cpt::Cpt;
pub use dag::{build_structure, Dag, Node, StateSpaces, Var};
pub use infer::{argmax_stage, classify_hs, loglik, predict_next_stage, window_hs_posterior};
pub use model::{make_windows, subject_windows, FittedBn, Window, UNIFORM_HS_PRIOR};
pub use model_file::{load_model, model_from_json, model_to_json, save_model, MODEL_SCHEMA, MODEL_SCHEMA_VERSION};
pub use sample::{ancestral_sample, resolve_fixed, Sampler};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::{DiscreteBout, DiscretizationSpec, QuantileBins, TSSO_EDGES};
    use crate::stage::{HealthStatus, Stage};

    fn spec() -> DiscretizationSpec {
        DiscretizationSpec {
            tsso_edges: TSSO_EDGES,
            duration: QuantileBins::from_edges([1.0, 2.5, 6.0], false, 15.0).unwrap(),
            cst: QuantileBins::from_edges([60.0, 150.0, 300.0], true, 480.0).unwrap(),
            crst: QuantileBins::from_edges([20.0, 60.0, 120.0], true, 200.0).unwrap(),
        }
    }

    fn bout(stage: Stage) -> DiscreteBout {
        DiscreteBout {
            stage,
            d_level: 0,
            t_level: 0,
            cst_level: 0,
            crst_level: 0,
        }
    }

    fn window(hs: HealthStatus, stages: &[Stage]) -> Window {
        Window {
            hs,
            bouts: stages.iter().map(|&s| bout(s)).collect(),
        }
    }

    #[test]
    fn deterministic_row_and_tie_break() {
        let cfg = BnConfig::new(1, false, false, Cumulative::None);
        let w = window(HealthStatus::H, &[Stage::N2, Stage::N1]);
        let mut bn = FittedBn::fit(cfg, spec(), std::slice::from_ref(&w)).unwrap();
        let s = bn.node_index(Var::Stage(0));
        let row = bn.cpts[s].row_index([Stage::N2.index(), 0]).unwrap();
        bn.cpts[s].row_mut(row).copy_from_slice(&[0.0, 1.0, 0.0, 0.0, 0.0]);
        let p = predict_next_stage(&bn, &w).unwrap();
        assert_eq!(argmax_stage(&p), Stage::N1);
        assert_eq!(p[1], 1.0);

        assert_eq!(argmax_stage(&[0.2; 5]), Stage::W);
        let other = window(HealthStatus::Cfs, &[Stage::R, Stage::W]);
        let p = predict_next_stage(&bn, &other).unwrap();
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn out_of_range_level_is_contract_violation() {
        let cfg = BnConfig::new(1, false, true, Cumulative::None);
        let mut w = window(HealthStatus::H, &[Stage::N2, Stage::N1]);
        let bn = FittedBn::fit(cfg, spec(), std::slice::from_ref(&w)).unwrap();
        w.bouts[0].d_level = 9;
        assert!(matches!(predict_next_stage(&bn, &w), Err(crate::Error::Contract(_))));
    }

    #[test]
    fn empty_training_set() {
        let cfg = BnConfig::new(1, false, false, Cumulative::None);
        assert!(matches!(FittedBn::fit(cfg, spec(), &[]), Err(crate::Error::Fit(_))));
    }

    #[test]
    fn windows_skip_first_lag_bouts() {
        let b: Vec<_> = [Stage::N1, Stage::N2, Stage::N3, Stage::R].iter().map(|&s| bout(s)).collect();
        let w = make_windows(HealthStatus::H, &b, 2);
        assert_eq!(w.len(), 2);
        assert_eq!(w[0].current().stage, Stage::N3);
        assert_eq!(w[0].at(2).stage, Stage::N1);
        assert!(make_windows(HealthStatus::H, &b[..2], 2).is_empty());
        assert_eq!(make_windows(HealthStatus::H, &b, 0).len(), 4);
    }

    #[test]
    fn identical_tables_leave_prior_unchanged() {
        let cfg = BnConfig::new(1, false, false, Cumulative::None);
        let ws: Vec<Window> = HealthStatus::ALL
            .iter()
            .flat_map(|&h| vec![window(h, &[Stage::N1, Stage::N2]), window(h, &[Stage::N2, Stage::R])])
            .collect();
        let mut bn = FittedBn::fit(cfg, spec(), &ws).unwrap();
        bn.set_hs_prior([0.5, 0.3, 0.2]).unwrap();
        let post = classify_hs(&bn, &ws[..2]).unwrap();
        for (a, b) in post.iter().zip([0.5, 0.3, 0.2]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn bayes_arithmetic_nine_to_one() {
        // lag 0: S[t] | HS. Likelihood of N2 is 0.9 / 0.1 / 0 under H / CFS / CFSFM.
        let cfg = BnConfig::new(0, false, false, Cumulative::None);
        let w = window(HealthStatus::H, &[Stage::N2]);
        let mut bn = FittedBn::fit(cfg, spec(), std::slice::from_ref(&w)).unwrap();
        let s = bn.node_index(Var::Stage(0));
        bn.cpts[s].row_mut(0).copy_from_slice(&[0.0, 0.1, 0.9, 0.0, 0.0]);
        bn.cpts[s].row_mut(1).copy_from_slice(&[0.0, 0.9, 0.1, 0.0, 0.0]);
        bn.cpts[s].row_mut(2).copy_from_slice(&[0.0, 1.0, 0.0, 0.0, 0.0]);
        let post = classify_hs(&bn, &[w]).unwrap();
        assert!((post[0] - 0.9).abs() < 1e-12);
        assert!((post[1] - 0.1).abs() < 1e-12);
        assert_eq!(post[2], 0.0);
    }

    #[test]
    fn loglik_is_additive_and_zero_for_certain_events() {
        let cfg = BnConfig::new(0, false, false, Cumulative::None).with_alpha(0.0);
        let w = window(HealthStatus::H, &[Stage::N2]);
        let mut bn = FittedBn::fit(cfg, spec(), std::slice::from_ref(&w)).unwrap();
        bn.set_hs_prior([1.0, 0.0, 0.0]).unwrap();
        assert_eq!(loglik(&bn, std::slice::from_ref(&w)).unwrap(), 0.0);

        let other = window(HealthStatus::H, &[Stage::R]);
        assert_eq!(loglik(&bn, &[other]).unwrap(), f64::NEG_INFINITY);

        let cfg = BnConfig::new(0, false, false, Cumulative::None);
        let ws = vec![w.clone(), window(HealthStatus::Cfs, &[Stage::R])];
        let bn = FittedBn::fit(cfg, spec(), &ws).unwrap();
        let one = loglik(&bn, std::slice::from_ref(&w)).unwrap();
        let two = loglik(&bn, &[w.clone(), w]).unwrap();
        assert_eq!(two, 2.0 * one);
    }

    #[test]
    fn fixing_non_root_is_unsupported() {
        let cfg = BnConfig::new(1, false, false, Cumulative::None);
        let w = window(HealthStatus::H, &[Stage::N2, Stage::N1]);
        let bn = FittedBn::fit(cfg, spec(), &[w]).unwrap();
        assert!(matches!(
            ancestral_sample(&bn, 10, 1, &[(Var::Stage(0), 1)]),
            Err(crate::Error::Unsupported(_))
        ));
        let s = ancestral_sample(&bn, 1000, 5, &[(Var::Hs, 1)]).unwrap();
        let hs = bn.node_index(Var::Hs);
        assert!(s.iter().all(|a| a[hs] == 1));
        assert_eq!(s, ancestral_sample(&bn, 1000, 5, &[(Var::Hs, 1)]).unwrap());
        assert_ne!(s, ancestral_sample(&bn, 1000, 6, &[(Var::Hs, 1)]).unwrap());
    }

    #[test]
    fn model_file_round_trip() {
        let cfg = BnConfig::new(2, true, true, Cumulative::Cst);
        let ws = vec![
            window(HealthStatus::H, &[Stage::N2, Stage::N1, Stage::W]),
            window(HealthStatus::CfsFm, &[Stage::N3, Stage::N2, Stage::R]),
        ];
        let bn = FittedBn::fit(cfg, spec(), &ws).unwrap();
        let text = model_to_json(&bn).unwrap();
        let back = model_from_json(&text).unwrap();
        assert_eq!(back, bn);
        for w in &ws {
            assert_eq!(predict_next_stage(&bn, w).unwrap(), predict_next_stage(&back, w).unwrap());
        }
        let bad = text.replace("\"version\": 1", "\"version\": 99");
        assert!(matches!(model_from_json(&bad), Err(crate::Error::Schema(_))));
    }
}
