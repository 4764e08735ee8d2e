use proptest::prelude::*;

use crossdiff::certificates::{det_a, Edge};
use crossdiff::io::config::{
    CoefficientsConfig, GridConfig, InitialConfig, OutputConfig, ReactionConfig, TimeConfig,
};
use crossdiff::io::{InitialProfile, SimConfig, SCHEMA_VERSION};
use crossdiff::oracle::{compare_with_oracle, spectral_oracle_scan};
use crossdiff::solver::run;
use crossdiff::{check_psd_iff, check_symmetry, CoeffSet, Mat2, CHECK_TOL};

fn free() -> impl Strategy<Value = (f64, f64, f64, f64, f64)> {
    (-3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// A set is symmetric exactly when it is the completion of its own free parameters.
    #[test]
    fn symmetry_iff_completion(p in free(), noise in prop::array::uniform6(-1.0..1.0f64), which in 0usize..7) {
        let c = CoeffSet::from_free(p.0, p.1, p.2, p.3, p.4);
        prop_assert!(check_symmetry(&c, CHECK_TOL).passed);
        let mut perturbed = c;
        let bump = noise[0].abs() + 0.1;
        match which {
            0 => perturbed.alpha.0[0][1] += bump,
            1 => perturbed.alpha.0[1][0] += bump,
            2 => perturbed.beta.0[1][0] += bump,
            3 => perturbed.gamma.0[0][1] += bump,
            4 => perturbed.beta.0[1][1] += bump,
            5 => perturbed.gamma.0[0][0] += bump,
            _ => perturbed.gamma.0[1][0] += bump,
        }
        prop_assert!(!check_symmetry(&perturbed, CHECK_TOL).passed);
        prop_assert_eq!(perturbed.free_params().complete() == perturbed, false);
    }

    /// Soundness: a passing set has no negative direction anywhere on the scan.
    #[test]
    fn psd_criterion_is_sound(p in (0.0..3.0f64, 0.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64)) {
        let c = CoeffSet::from_free(p.0, p.1, p.2, p.3, p.4);
        let r = check_psd_iff(&c, CHECK_TOL).unwrap();
        prop_assume!(r.passed);
        prop_assert!(spectral_oracle_scan(&c, 48).indicates_psd());
    }

    /// Completeness: a failing set with a clear margin has a witness.
    #[test]
    fn psd_criterion_is_complete(p in free()) {
        let c = CoeffSet::from_free(p.0, p.1, p.2, p.3, p.4);
        let cmp = compare_with_oracle(&c, 48).unwrap();
        prop_assume!(!cmp.criterion_passed && !cmp.degenerate);
        prop_assert!(!cmp.oracle_psd);
        prop_assert!(cmp.witness.is_some());
    }

    /// det A >= 0 on the boundary whenever the criterion passes.
    #[test]
    fn det_a_nonnegative_on_boundary(p in (0.0..3.0f64, 0.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64)) {
        let c = CoeffSet::from_free(p.0, p.1, p.2, p.3, p.4);
        prop_assume!(check_psd_iff(&c, CHECK_TOL).unwrap().passed);
        for k in 0..=50 {
            let t = k as f64 / 50.0;
            for e in [Edge::U1Zero, Edge::U2Zero, Edge::Hypotenuse] {
                prop_assert!(det_a(&c, &e.point(t)) >= -1e-12);
            }
        }
    }
}

fn sim(a10: f64, a12: f64, d: f64, b: [f64; 6], amp: [f64; 2], seed: u64) -> SimConfig {
    let a11 = a12 + d;
    SimConfig {
        schema_version: SCHEMA_VERSION,
        seed,
        coefficients: CoefficientsConfig::Skt { a10, a20: a10 + d, a11, a12, a21: a11, a22: a12 },
        reaction: ReactionConfig::LotkaVolterra {
            b1: [b[0] * b[1].min(b[2]), b[1], b[2]],
            b2: [b[3] * b[4].min(b[5]), b[4], b[5]],
        },
        grid: GridConfig { n_cells: 24, length: 1.0 },
        initial: InitialConfig {
            profile: InitialProfile::TwoBump { base: [0.02, 0.02], amp, centers: [0.3, 0.7], width: 0.1 },
            noise: 0.005,
            rescale_initial: true,
        },
        time: TimeConfig { tau: 5e-3, t_end: 0.25, tau_min: None },
        output: OutputConfig::default(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Every reconstructed density stays in the open triangle, and the run reaches t_end.
    #[test]
    fn simulations_stay_confined(
        a10 in 0.01..1.0f64, a12 in 0.0..1.0f64, d in 0.0..1.0f64,
        b in prop::array::uniform6(0.0..4.0f64),
        amp in prop::array::uniform2(0.1..0.9f64),
        seed in 0u64..1000,
    ) {
        let b = [b[0] / 4.0, b[1] + 0.1, b[2] + 0.1, b[3] / 4.0, b[4] + 0.1, b[5] + 0.1];
        let cfg = sim(a10, a12, d, b, amp, seed).validate().unwrap();
        let out = run(&cfg).unwrap();
        prop_assert!(out.completed());
        prop_assert_eq!(out.interior_violations, 0);
        prop_assert!(out.final_state.densities().iter().all(|p| p.u1 > 0.0 && p.u2 > 0.0 && p.u3 > 0.0));
        prop_assert!((out.final_state.t - 0.25).abs() < 1e-12);
    }
}

#[test]
fn mat2_symmetric_part_controls_quadratic_form() {
    let m = Mat2::new(1.0, 3.0, -1.0, 2.0);
    let s = m.sym_part();
    for z in [[1.0, 0.0], [0.3, -0.7], [2.0, 5.0]] {
        let q = |a: &Mat2| z[0] * a.mul_vec(z)[0] + z[1] * a.mul_vec(z)[1];
        assert!((q(&m) - q(&s)).abs() < 1e-14);
    }
}
