use stair_mimo::airlink::{draw_channel, modulate, noise_variance_for_snr, transmit, SimRng};
use stair_mimo::cxmat::{gramian, inverse_general, matched_filter, solve_hermitian, ComplexVector};
use stair_mimo::detectors::{
    detect, detect_cg, detect_cg_with_history, detect_exact, detect_gs, detect_nsa,
    detect_richardson, detect_stair, extract_stair, invert_stair, on_stair, stair_support,
    Algorithm, DetectorConfig, FixedStairDetector,
};
use stair_mimo::fxp::FxpProfile;
use stair_mimo::{CMatrix, CMatrix32, CVector, CVector32, Constellation, Cx, StairMatrix};

struct Instance {
    g: CMatrix,
    xmf: CVector,
}

fn instance(b: usize, u: usize, snr_db: f64, seed: u64) -> Instance {
    let mut rng = SimRng::new(seed);
    let c = Constellation::new(256).unwrap();
    let x = modulate(&rng.bits(8 * u), &c, u).unwrap();
    let h = draw_channel::<f64>(b, u, &mut rng).unwrap();
    let sigma2 = noise_variance_for_snr(snr_db, u);
    let y = transmit(&x, &h, sigma2, &mut rng).unwrap();
    Instance {
        g: gramian(&h, sigma2).unwrap(),
        xmf: matched_filter(&h, &y).unwrap(),
    }
}

fn random_diag_system(u: usize, rng: &mut SimRng) -> Instance {
    let d: Vec<Cx<f64>> = (0..u)
        .map(|_| Cx::new(0.5 + 4.0 * rng.uniform(), 0.0))
        .collect();
    Instance {
        g: CMatrix::from_diag(&d),
        xmf: ComplexVector::from_vec((0..u).map(|_| rng.complex_gaussian(1.0)).collect()),
    }
}

/// Spectral radius by power iteration on the explicit iteration matrix.
fn spectral_radius(m: &CMatrix) -> f64 {
    let n = m.rows();
    let mut v = CVector::from_vec((0..n).map(|i| Cx::new(1.0 + i as f64 * 0.1, 0.3)).collect());
    let mut est = 0.0;
    for k in 0..2000 {
        let w = m.matvec(&v).unwrap();
        let nw = w.norm();
        if nw == 0.0 {
            return 0.0;
        }
        if k > 1500 {
            est = f64::max(est, nw / v.norm());
        }
        v = w.scale(1.0 / nw);
    }
    est
}

#[test]
fn extracted_stair_has_even_row_support() {
    assert_eq!(
        stair_support(8),
        vec![(1, 0), (1, 2), (3, 2), (3, 4), (5, 4), (5, 6), (7, 6)]
    );
    assert_eq!(
        stair_support(6),
        vec![(1, 0), (1, 2), (3, 2), (3, 4), (5, 4)]
    );
    let inst = instance(64, 8, 10.0, 1);
    let s = extract_stair(&inst.g).unwrap();
    assert_eq!(s.off_diagonals().len(), 7);
    for e in s.off_diagonals() {
        assert_eq!(e.value, inst.g[(e.row, e.col)]);
    }
    for (i, d) in s.diag().iter().enumerate() {
        assert_eq!(*d, inst.g[(i, i)].re);
    }
    let identity = extract_stair(&CMatrix::identity(5)).unwrap();
    assert!(identity
        .off_diagonals()
        .iter()
        .all(|e| e.value == Cx::new(0.0, 0.0)));
}

#[test]
fn hand_inverted_stair_matrices() {
    let s = StairMatrix::new(vec![2.0, 4.0], vec![Cx::new(0.0, 0.0)]).unwrap();
    let inv = invert_stair(&s).unwrap().to_dense();
    let want = CMatrix::from_real_rows(&[&[0.5, 0.0], &[0.0, 0.25]]).unwrap();
    assert_eq!(inv, want);

    let s = StairMatrix::new(vec![1.0, 1.0], vec![Cx::new(1.0, 0.0)]).unwrap();
    let inv = invert_stair(&s).unwrap().to_dense();
    let want = CMatrix::from_real_rows(&[&[1.0, 0.0], &[-1.0, 1.0]]).unwrap();
    assert_eq!(inv, want);
}

#[test]
fn stair_inverse_preserves_support() {
    let mut rng = SimRng::new(2);
    for u in 1..=9 {
        let diag: Vec<f64> = (0..u).map(|_| 2.0 + rng.uniform()).collect();
        let off = (0..stair_support(u).len())
            .map(|_| rng.complex_gaussian(0.5))
            .collect();
        let s = StairMatrix::new(diag, off).unwrap();
        let inv = invert_stair(&s).unwrap();
        let dense = inv.to_dense();
        for i in 0..u {
            for j in 0..u {
                if !(i == j || on_stair(i, j)) {
                    assert_eq!(dense[(i, j)], Cx::new(0.0, 0.0));
                }
            }
            assert!((inv.diag()[i] - 1.0 / s.diag()[i]).abs() <= 1e-15);
        }
        let oracle = inverse_general(&s.to_dense()).unwrap();
        assert!(dense.max_abs_diff(&oracle).unwrap() <= 1e-12);
    }
}

#[test]
fn stair_with_zero_iterations_is_the_initial_estimate() {
    let inst = instance(128, 8, 12.0, 3);
    let s = extract_stair(&inst.g).unwrap();
    let x0 = invert_stair(&s).unwrap().apply(&inst.xmf);
    assert_eq!(detect_stair(&inst.g, &inst.xmf, 0).unwrap(), x0);
}

#[test]
fn small_stair_systems_converge_when_contractive() {
    let mut rng = SimRng::new(4);
    let mut checked = 0;
    for trial in 0..400 {
        let u = 2 + trial % 3;
        let b = u + 1 + trial % 6;
        let h = draw_channel::<f64>(b, u, &mut rng).unwrap();
        let g = gramian(&h, 0.05).unwrap();
        let xmf = CVector::from_vec((0..u).map(|_| rng.complex_gaussian(1.0)).collect());
        let s = extract_stair(&g).unwrap();
        let sinv = invert_stair(&s).unwrap().to_dense();
        let mut s_minus_g = s.to_dense();
        for i in 0..u {
            for j in 0..u {
                s_minus_g[(i, j)] -= g[(i, j)];
            }
        }
        let rho = spectral_radius(&sinv.matmul(&s_minus_g).unwrap());
        if rho >= 0.5 {
            continue;
        }
        checked += 1;
        let x = detect_stair(&g, &xmf, 40).unwrap();
        let exact = solve_hermitian(&g, &xmf).unwrap();
        assert!(
            x.max_abs_diff(&exact).unwrap() <= 1e-8 * (1.0 + exact.norm()),
            "rho={rho}"
        );
    }
    assert!(checked > 50, "only {checked} contractive instances");
}

#[test]
fn diagonal_gramian_makes_all_detectors_agree() {
    let mut rng = SimRng::new(5);
    for u in [1, 2, 5, 8] {
        let inst = random_diag_system(u, &mut rng);
        let want = CVector::from_vec((0..u).map(|i| inst.xmf[i] / inst.g[(i, i)].re).collect());
        let results = [
            detect_stair(&inst.g, &inst.xmf, 0).unwrap(),
            detect_stair(&inst.g, &inst.xmf, 3).unwrap(),
            detect_gs(&inst.g, &inst.xmf, 1).unwrap(),
            detect_nsa(&inst.g, &inst.xmf, 1).unwrap(),
            detect_nsa(&inst.g, &inst.xmf, 4).unwrap(),
            detect_exact(&inst.g, &inst.xmf).unwrap(),
        ];
        for r in results {
            assert!(r.max_abs_diff(&want).unwrap() <= 1e-14);
        }
    }
}

#[test]
fn gauss_seidel_hand_example() {
    let g = CMatrix::from_real_rows(&[&[2.0, 1.0], &[1.0, 2.0]]).unwrap();
    let xmf = CVector::from_real(&[3.0, 3.0]);
    assert_eq!(
        detect_gs(&g, &xmf, 0).unwrap(),
        CVector::from_real(&[1.5, 1.5])
    );
    assert_eq!(
        detect_gs(&g, &xmf, 1).unwrap(),
        CVector::from_real(&[0.75, 1.125])
    );
}

#[test]
fn gauss_seidel_converges_on_small_spd() {
    let inst = instance(16, 8, 10.0, 6);
    let x = detect_gs(&inst.g, &inst.xmf, 50).unwrap();
    let exact = solve_hermitian(&inst.g, &inst.xmf).unwrap();
    assert!(x.max_abs_diff(&exact).unwrap() <= 1e-8);
}

#[test]
fn cg_terminates_in_u_steps_with_shrinking_residual() {
    for seed in 0..10 {
        let inst = instance(32, 8, 10.0, 100 + seed);
        let (x, hist) = detect_cg_with_history(&inst.g, &inst.xmf, 8).unwrap();
        let exact = solve_hermitian(&inst.g, &inst.xmf).unwrap();
        assert!(x.max_abs_diff(&exact).unwrap() <= 1e-8);
        // CG minimises the G-norm error; report residuals as a sanity trace.
        assert!(hist.last().unwrap() <= &(1e-8 * inst.xmf.norm()));
        let energy = |v: &CVector| {
            let e = v.sub(&exact).unwrap();
            inst.g.matvec(&e).unwrap().dot_h(&e).unwrap().re
        };
        let mut prev = f64::INFINITY;
        for k in 0..=8 {
            let e = energy(&detect_cg(&inst.g, &inst.xmf, k).unwrap());
            assert!(e <= prev * (1.0 + 1e-12) + 1e-20, "step {k}");
            prev = e;
        }
    }
    let xmf = CVector::from_real(&[1.0, -2.0, 0.5]);
    assert!(
        detect_cg(&CMatrix::identity(3), &xmf, 1)
            .unwrap()
            .max_abs_diff(&xmf)
            .unwrap()
            < 1e-15
    );
}

#[test]
fn richardson_fixed_point_on_identity() {
    let xmf = CVector::from_real(&[1.0, -2.0, 0.5]);
    for k in [1, 5] {
        assert_eq!(
            detect_richardson(&CMatrix::identity(3), &xmf, k, 1.0).unwrap(),
            xmf
        );
    }
    let cfg = DetectorConfig::new(Algorithm::Richardson, 2).with_omega(0.0);
    assert!(cfg.validate().is_err());
}

#[test]
fn exact_detector_residual() {
    for seed in 0..20 {
        let inst = instance(128, 8, 15.0, 200 + seed);
        let x = detect_exact(&inst.g, &inst.xmf).unwrap();
        let r = inst.g.matvec(&x).unwrap().sub(&inst.xmf).unwrap();
        assert!(r.norm() <= 1e-10 * inst.xmf.norm());
    }
}

#[test]
fn fixed_point_tracks_float_at_moderate_snr() {
    let det = FixedStairDetector::new(FxpProfile::HARDWARE).unwrap();
    let mut worst: f64 = 0.0;
    for seed in 0..50 {
        for snr in [10.0, 15.0, 20.0] {
            let inst = instance(128, 8, snr, 300 + seed);
            let fx = det.detect(&inst.g, &inst.xmf, 2).unwrap();
            let fl = detect_stair(&inst.g, &inst.xmf, 2).unwrap();
            worst = worst.max(fx.max_abs_diff(&fl).unwrap());
        }
    }
    assert!(worst <= 2f64.powi(-6), "worst {worst}");
}

#[test]
fn detectors_are_deterministic() {
    let inst = instance(128, 8, 12.0, 7);
    for cfg in [
        DetectorConfig::new(Algorithm::Stair, 2),
        DetectorConfig::new(Algorithm::Stair, 2).fixed(FxpProfile::HARDWARE),
        DetectorConfig::new(Algorithm::Gs, 2),
        DetectorConfig::new(Algorithm::Cg, 2),
    ] {
        let a = detect(&cfg, &inst.g, &inst.xmf).unwrap();
        let b = detect(&cfg, &inst.g, &inst.xmf).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn fixed_mode_is_stair_only() {
    let inst = instance(16, 4, 10.0, 8);
    let cfg = DetectorConfig::new(Algorithm::Gs, 2).fixed(FxpProfile::HARDWARE);
    assert!(detect(&cfg, &inst.g, &inst.xmf).is_err());
}

#[test]
fn mismatched_shapes_are_rejected() {
    let g = CMatrix::identity(3);
    let xmf = CVector::zeros(4);
    assert!(detect_stair(&g, &xmf, 1).is_err());
    assert!(detect_gs(&g, &xmf, 1).is_err());
    assert!(detect_nsa(&g, &xmf, 1).is_err());
    assert!(detect_cg(&g, &xmf, 1).is_err());
    assert!(detect_exact(&g, &xmf).is_err());
}

#[test]
fn single_precision_detectors_run() {
    let inst = instance(128, 8, 15.0, 9);
    let g32 = CMatrix32::from_row_major(
        8,
        8,
        inst.g
            .as_slice()
            .iter()
            .map(|z| Cx::new(z.re as f32, z.im as f32))
            .collect(),
    )
    .unwrap();
    let xmf32 = CVector32::from_vec(
        inst.xmf
            .iter()
            .map(|z| Cx::new(z.re as f32, z.im as f32))
            .collect(),
    );
    let x64 = detect_stair(&inst.g, &inst.xmf, 2).unwrap();
    let x32 = detect_stair(&g32, &xmf32, 2).unwrap();
    for i in 0..8 {
        let d = Cx::new(x32[i].re as f64, x32[i].im as f64) - x64[i];
        assert!(d.norm() <= 1e-4);
    }
}
