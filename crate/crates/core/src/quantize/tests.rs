use num_complex::Complex64;
use proptest::prelude::*;

use super::*;
use crate::geometry::{FourierMode, Monomial, Symbol};
use crate::linalg::{hermitian_defect, max_abs_diff, operator_norm, trace};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn sphere(terms: &[((u32, u32, u32), Complex64)]) -> SymbolSpec {
    SymbolSpec::Sphere(Symbol::from_terms(terms.iter().map(|((a, b, cc), v)| (Monomial::new(*a, *b, *cc), *v))))
}

fn torus(terms: &[((i32, i32), Complex64)]) -> SymbolSpec {
    SymbolSpec::Torus(Symbol::from_terms(terms.iter().map(|((m, n), v)| (FourierMode::new(*m, *n), *v))))
}

#[test]
fn dimensions() {
    assert_eq!(bergman_dimension(&PhaseSpace::sphere(), 10), 11);
    assert_eq!(bergman_dimension(&PhaseSpace::torus(), 50), 50);
    for n in 10..=200 {
        for space in [PhaseSpace::sphere(), PhaseSpace::torus()] {
            assert!((bergman_dimension(&space, n) as f64 - space.weyl_dimension(n)).abs() <= 1.0 + 1e-9);
        }
    }
}

#[test]
fn scottish_flag_matrix() {
    let n = 50;
    let t = quantize_torus(&SymbolSpec::scottish_flag(), n).unwrap();
    assert_eq!(t.dim, 50);
    let half_i = c(0.0, 0.5);
    for r in 0..n {
        for col in 0..n {
            let expect = if r == col {
                c((std::f64::consts::TAU * (r + 1) as f64 / n as f64).cos(), 0.0)
            } else if (r + 1) % n == col || (col + 1) % n == r {
                half_i
            } else {
                c(0.0, 0.0)
            };
            assert!((t.entries[(r, col)] - expect).norm() < 1e-14, "({r},{col})");
        }
    }
}

#[test]
fn torus_clock_and_identity() {
    let n = 7;
    let clock = quantize_torus(&torus(&[((1, 0), c(1.0, 0.0))]), n).unwrap();
    for k in 0..n {
        let expect = Complex64::from_polar(1.0, std::f64::consts::TAU * (k + 1) as f64 / n as f64);
        assert!((clock.entries[(k, k)] - expect).norm() < 1e-14);
    }
    let id = quantize_torus(&SymbolSpec::constant(SpaceKind::Torus, c(1.0, 0.0)), n).unwrap();
    assert_eq!(max_abs_diff(&id.entries, &linalg::identity(n)), 0.0);
}

#[test]
fn torus_mode_limit() {
    let f = torus(&[((3, -1), c(1.0, 0.0))]);
    assert!(matches!(quantize_torus(&f, 6), Err(Error::ModeTooLarge { m: 3, k: -1, .. })));
    assert!(quantize_torus(&f, 7).is_ok());
    assert!(matches!(quantize_torus(&SymbolSpec::sphere_height(), 7), Err(Error::KindMismatch { .. })));
}

#[test]
fn torus_mixed_mode_composition_residual() {
    // T(e^{2πix}) T(e^{2πiξ}) - T(e^{2πi(x+ξ)}) = (e^{πi/N} - 1) T(e^{2πi(x+ξ)}).
    let n = 40;
    let a = quantize_torus(&torus(&[((1, 0), c(1.0, 0.0))]), n).unwrap().entries;
    let b = quantize_torus(&torus(&[((0, 1), c(1.0, 0.0))]), n).unwrap().entries;
    let ab = quantize_torus(&torus(&[((1, 1), c(1.0, 0.0))]), n).unwrap().entries;
    let diff = linalg::add_scaled(&(&a * &b), -1.0, &ab);
    let expect = 2.0 * (std::f64::consts::PI / (2.0 * n as f64)).sin();
    assert!((operator_norm(&diff).unwrap() - expect).abs() < 1e-12);
}

#[test]
fn sphere_height_is_diagonal() {
    let n = 12;
    let t = quantize_sphere(&SymbolSpec::sphere_height(), n).unwrap();
    for l in 0..=n {
        for k in 0..=n {
            let expect = if l == k { (n as f64 - 2.0 * k as f64) / (n as f64 + 2.0) } else { 0.0 };
            assert!((t.entries[(l, k)] - c(expect, 0.0)).norm() < 1e-12, "({l},{k})");
        }
    }
}

#[test]
fn sphere_x1_at_n2() {
    let t = quantize_sphere(&sphere(&[((1, 0, 0), c(1.0, 0.0))]), 2).unwrap();
    assert!((t.entries[(0, 1)].re - 2f64.sqrt() / 4.0).abs() < 1e-12);
    assert!((t.entries[(1, 0)].re - 2f64.sqrt() / 4.0).abs() < 1e-12);
    assert!(t.entries[(0, 2)].norm() < 1e-15 && t.entries[(1, 1)].norm() < 1e-15);
}

#[test]
fn sphere_identity_and_trace() {
    let t = quantize_sphere(&SymbolSpec::constant(SpaceKind::Sphere, c(1.0, 0.0)), 30).unwrap();
    assert!(max_abs_diff(&t.entries, &linalg::identity(31)) < 1e-13);
    assert!((trace(&t.entries) - c(31.0, 0.0)).norm() < 1e-11);
}

#[test]
fn sphere_degree_limit() {
    let f = sphere(&[((2, 1, 0), c(1.0, 0.0))]);
    assert!(matches!(quantize_sphere(&f, 5), Err(Error::DegreeTooLarge { degree: 3, .. })));
    assert!(quantize_sphere(&f, 6).is_ok());
}

#[test]
fn closed_form_matches_quadrature() {
    let symbols = [
        sphere(&[((0, 0, 1), c(1.0, 0.0))]),
        sphere(&[((1, 0, 0), c(1.0, 0.0)), ((2, 0, 0), c(2.0, 0.0)), ((0, 1, 0), c(0.0, 1.0))]),
        sphere(&[((1, 1, 2), c(0.3, -0.7)), ((0, 3, 0), c(1.0, 0.0)), ((0, 0, 4), c(-0.5, 0.0))]),
        sphere(&[((2, 2, 0), c(1.0, 1.0)), ((1, 0, 3), c(0.2, 0.0))]),
    ];
    for f in &symbols {
        for n in [8, 25, 60] {
            let exact = quantize_sphere(f, n).unwrap().entries;
            let quad = quantize_sphere_by_quadrature(f, n, n + 8).unwrap();
            let err = max_abs_diff(&exact, &quad);
            assert!(err < 1e-8, "N={n} err={err:e} f={f}");
        }
    }
}

#[test]
fn scottish_flag_norm_bound_large_n() {
    let t = quantize_torus(&SymbolSpec::scottish_flag(), 500).unwrap();
    assert!(operator_norm(&t.entries).unwrap() <= 2f64.sqrt() + 1e-8);
}

#[test]
fn unitary_change_of_basis_preserves_spectrum() {
    let t = quantize_sphere(&SymbolSpec::sphere_height(), 16).unwrap().entries;
    let mut stream = crate::rng::Stream::new(11);
    let g = CMatrix::from_fn(17, 17, |_, _| stream.complex_gaussian());
    let u = linalg::svd(&g).unwrap().u;
    let conj = &(&linalg::adjoint(&u) * &t) * &u;
    let mut a = linalg::hermitian_eigenvalues(&t).unwrap();
    let mut b = linalg::hermitian_eigenvalues(&conj).unwrap();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() < 1e-10);
    }
}

#[test]
fn matrix_file_round_trip_is_bit_exact() {
    let t = quantize_sphere(&sphere(&[((1, 0, 0), c(1.0, 0.0)), ((0, 1, 0), c(0.1, 0.3))]), 9).unwrap();
    let bytes = encode_matrix(&t);
    let back = decode_matrix(&bytes).unwrap();
    assert_eq!(back.n, 9);
    assert_eq!(back.symbol, t.symbol);
    assert_eq!(encode_matrix(&back), bytes);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.btqm");
    write_matrix(&t, &path).unwrap();
    assert_eq!(encode_matrix(&read_matrix(&path).unwrap()), bytes);
}

#[test]
fn matrix_file_rejects_corruption() {
    let t = quantize_torus(&SymbolSpec::scottish_flag(), 5).unwrap();
    let bytes = encode_matrix(&t);
    assert!(decode_matrix(&bytes[..bytes.len() - 1]).is_err());
    let mut bad = bytes.clone();
    bad[0] = b'X';
    assert!(decode_matrix(&bad).is_err());
    let mut bad = bytes.clone();
    bad[8] = 1; // claims sphere, record says torus
    assert!(decode_matrix(&bad).is_err());
    let mut bad = bytes.clone();
    bad[17] = 9; // dimension no longer matches N
    assert!(decode_matrix(&bad).is_err());
}

fn arb_real_sphere_symbol() -> impl Strategy<Value = SymbolSpec> {
    prop::collection::vec(((0u32..3, 0u32..3, 0u32..3), -2.0f64..2.0), 1..5)
        .prop_map(|ts| sphere(&ts.into_iter().map(|(k, v)| (k, c(v, 0.0))).collect::<Vec<_>>()))
}

fn arb_torus_symbol() -> impl Strategy<Value = SymbolSpec> {
    prop::collection::vec(((-3i32..=3, -3i32..=3), -1.0f64..1.0, -1.0f64..1.0), 1..6)
        .prop_map(|ts| torus(&ts.into_iter().map(|(k, a, b)| (k, c(a, b))).collect::<Vec<_>>()))
}

fn sup_on_grid(f: &SymbolSpec) -> f64 {
    let grid = liouville_sup_grid(f.kind());
    grid.iter().map(|p| f.eval_principal(p).unwrap().norm()).fold(0.0, f64::max)
}

fn liouville_sup_grid(kind: SpaceKind) -> Vec<crate::geometry::ManifoldPoint> {
    crate::geometry::liouville_quadrature(&crate::geometry::make_phase_space(kind), 200).points
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn real_symbols_give_hermitian_matrices(f in arb_real_sphere_symbol(), n in 12usize..40) {
        let t = quantize_sphere(&f, n).unwrap();
        prop_assert!(hermitian_defect(&t.entries) < 1e-12);
    }

    #[test]
    fn real_torus_symbols_give_hermitian_matrices(f in arb_torus_symbol(), n in 7usize..40) {
        let re = f.try_add(&SymbolSpec::Torus(match &f { SymbolSpec::Torus(s) => s.conj(), _ => unreachable!() })).unwrap();
        let t = quantize_torus(&re, n).unwrap();
        prop_assert!(hermitian_defect(&t.entries) < 1e-12);
    }

    #[test]
    fn quantization_is_linear(f in arb_torus_symbol(), g in arb_torus_symbol(), a in -2.0f64..2.0, n in 7usize..30) {
        let lhs = quantize_torus(&f.scale(c(a, 0.5)).try_add(&g).unwrap(), n).unwrap().entries;
        let rhs = linalg::add_scaled(
            &(&quantize_torus(&f, n).unwrap().entries * faer::Scale(c(a, 0.5))),
            1.0,
            &quantize_torus(&g, n).unwrap().entries,
        );
        prop_assert!(max_abs_diff(&lhs, &rhs) < 1e-13);
    }

    #[test]
    fn norm_is_bounded_by_sup(f in arb_real_sphere_symbol(), n in 12usize..60) {
        let t = quantize_sphere(&f, n).unwrap();
        // The grid supremum underestimates sup|f| by O(h^2); allow for it.
        prop_assert!(operator_norm(&t.entries).unwrap() <= sup_on_grid(&f) * (1.0 + 1e-3) + 1e-8);
    }

    #[test]
    fn torus_norm_is_bounded_by_coefficient_sum(f in arb_torus_symbol(), n in 7usize..60) {
        let t = quantize_torus(&f, n).unwrap();
        prop_assert!(operator_norm(&t.entries).unwrap() <= f.coefficient_l1() + 1e-10);
    }
}
