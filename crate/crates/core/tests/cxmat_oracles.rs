use stair_mimo::airlink::SimRng;
use stair_mimo::cxmat::{
    gramian, inverse_general, inverse_hermitian, matched_filter, solve_hermitian, ComplexMatrix,
    ComplexVector,
};
use stair_mimo::{CMatrix, CMatrix32, CVector, Cx, Error};

fn random_matrix(rows: usize, cols: usize, rng: &mut SimRng) -> CMatrix {
    let data = (0..rows * cols)
        .map(|_| rng.complex_gaussian(1.0))
        .collect();
    ComplexMatrix::from_row_major(rows, cols, data).unwrap()
}

fn random_vector(n: usize, rng: &mut SimRng) -> CVector {
    ComplexVector::from_vec((0..n).map(|_| rng.complex_gaussian(1.0)).collect())
}

#[test]
fn gramian_matches_triple_loop() {
    let mut rng = SimRng::new(101);
    for trial in 0..100 {
        let (b, u) = (16 + trial % 48, 1 + trial % 8);
        let h = random_matrix(b, u, &mut rng);
        let sigma2 = rng.uniform();
        let g = gramian(&h, sigma2).unwrap();
        let mut worst: f64 = 0.0;
        for i in 0..u {
            for j in 0..u {
                let mut acc = Cx::new(0.0, 0.0);
                for k in 0..b {
                    acc += h[(k, i)].conj() * h[(k, j)];
                }
                if i == j {
                    acc += Cx::new(sigma2, 0.0);
                }
                worst = worst.max((g[(i, j)] - acc).norm());
            }
        }
        assert!(worst <= 1e-12, "trial {trial}: {worst}");
        assert!(g.hermitian_defect() <= 1e-12);
        assert!(g.diag().iter().all(|d| d.im == 0.0 && d.re > 0.0));
    }
}

#[test]
fn matched_filter_matches_loop() {
    let mut rng = SimRng::new(202);
    for _ in 0..100 {
        let (b, u) = (32, 6);
        let h = random_matrix(b, u, &mut rng);
        let y = random_vector(b, &mut rng);
        let xmf = matched_filter(&h, &y).unwrap();
        for i in 0..u {
            let want = (0..b).fold(Cx::new(0.0, 0.0), |acc, k| acc + h[(k, i)].conj() * y[k]);
            assert!((xmf[i] - want).norm() <= 1e-12);
        }
    }
}

#[test]
fn cholesky_solve_agrees_with_gauss_jordan() {
    let mut rng = SimRng::new(303);
    for _ in 0..50 {
        let h = random_matrix(64, 8, &mut rng);
        let g = gramian(&h, 0.1).unwrap();
        let b = random_vector(8, &mut rng);
        let x = solve_hermitian(&g, &b).unwrap();
        let residual = g.matvec(&x).unwrap().sub(&b).unwrap();
        assert!(residual.norm() <= 1e-10 * b.norm());
        let inv_gj = inverse_general(&g).unwrap();
        let inv_ch = inverse_hermitian(&g).unwrap();
        assert!(inv_gj.max_abs_diff(&inv_ch).unwrap() <= 1e-12);
        let x_gj = inv_gj.matvec(&b).unwrap();
        assert!(x.max_abs_diff(&x_gj).unwrap() <= 1e-12);
    }
}

#[test]
fn hermitian_transpose_is_involution_and_reverses_products() {
    let mut rng = SimRng::new(404);
    let a = random_matrix(5, 3, &mut rng);
    let b = random_matrix(3, 4, &mut rng);
    assert_eq!(a.hermitian_transpose().hermitian_transpose(), a);
    let lhs = a.matmul(&b).unwrap().hermitian_transpose();
    let rhs = b
        .hermitian_transpose()
        .matmul(&a.hermitian_transpose())
        .unwrap();
    assert!(lhs.max_abs_diff(&rhs).unwrap() <= 1e-14);
}

#[test]
fn gramian_rejects_wide_channel_and_negative_noise() {
    let h = CMatrix::zeros(4, 8);
    assert!(matches!(
        gramian(&h, 0.0),
        Err(Error::Dimension(_)) | Err(Error::InvalidArgument(_))
    ));
    let h = CMatrix::identity(4);
    assert!(gramian(&h, -1.0).is_err());
}

#[test]
fn singular_system_is_reported() {
    let g = CMatrix::from_real_rows(&[&[1.0, 1.0], &[1.0, 1.0]]).unwrap();
    let b = CVector::from_real(&[1.0, 1.0]);
    assert!(solve_hermitian(&g, &b).is_err());
    assert!(inverse_general(&g).is_err());
}

#[test]
fn single_precision_tracks_double() {
    let mut rng = SimRng::new(505);
    let h = random_matrix(32, 4, &mut rng);
    let h32 = CMatrix32::from_row_major(
        32,
        4,
        h.as_slice()
            .iter()
            .map(|z| Cx::new(z.re as f32, z.im as f32))
            .collect(),
    )
    .unwrap();
    let g = gramian(&h, 0.5).unwrap();
    let g32 = gramian(&h32, 0.5f32).unwrap();
    for i in 0..4 {
        for j in 0..4 {
            let d = g[(i, j)] - Cx::new(g32[(i, j)].re as f64, g32[(i, j)].im as f64);
            assert!(d.norm() <= 1e-4 * g[(i, i)].re);
        }
    }
}
