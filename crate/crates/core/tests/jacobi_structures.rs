use contact_pairs::contact::{torus_contact_form, ContactPair};
use contact_pairs::expr::parse;
use contact_pairs::jacobi::{JacobiSide, LeafGrid, ScalarField, Side};
use contact_pairs::manifold::{FormField, ManifoldModel};

fn side(resolution: usize, which: Side) -> JacobiSide {
    let m = ManifoldModel::torus(4).unwrap();
    // type (1,0) on T^3 x T^1, or its mirror with the torus form second
    let (alpha, beta, k, l, axes) = match which {
        Side::Alpha => (torus_contact_form().pullback(0, 4).unwrap(), FormField::basis_one_form(4, 3), 1, 0, vec![0, 1, 2]),
        Side::Beta => (FormField::basis_one_form(4, 0), torus_contact_form().pullback(1, 4).unwrap(), 0, 1, vec![1, 2, 3]),
    };
    let pair = ContactPair::new(&m, alpha, beta, k, l).unwrap();
    let grid = LeafGrid {
        axes,
        base: vec![0.0; 4],
        resolution,
    };
    JacobiSide::new(&m, &pair, which, grid, 1e-8).unwrap()
}

fn e(s: &str) -> ScalarField {
    ScalarField::Expr(parse(s, 4).unwrap())
}

#[test]
fn bivector_reproduces_bracket_at_second_order() {
    let (f, g) = (e("sin(x0) + cos(x2)"), e("cos(x1)*sin(x0)"));
    let defects: Vec<f64> = [16, 32, 64]
        .iter()
        .map(|&r| {
            let s = side(r, Side::Alpha);
            let (lam, _) = s.build_bivector();
            s.bivector_consistency_defect(&lam, &f, &g).unwrap()
        })
        .collect();
    assert!(defects[0] / defects[1] >= 3.5 && defects[1] / defects[2] >= 3.5, "{defects:?}");
}

#[test]
fn bivector_storage_is_antisymmetric() {
    let s = side(8, Side::Alpha);
    let (lam, e) = s.build_bivector();
    for (l, reeb) in lam.values.iter().zip(&e.values) {
        for i in 0..4 {
            assert_eq!(l.get(i, i), 0.0);
            for j in 0..4 {
                assert_eq!(l.get(i, j), -l.get(j, i));
            }
        }
        assert_eq!(reeb.len(), 3);
    }
}

#[test]
fn beta_side_matches_alpha_side_by_symmetry() {
    // the mirrored pair puts the contact leaf on axes 1..3 with angle x1
    let s = side(16, Side::Beta);
    assert_eq!(s.leaf_dim(), 3);
    assert!(s.reeb_hamiltonian_defect().unwrap() < 1e-12);
    let d = s.jacobi_identity_defect(&e("sin(x1)"), &e("cos(x2) + sin(x3)"), &e("sin(x1 + x3)")).unwrap();
    let a = side(16, Side::Alpha)
        .jacobi_identity_defect(&e("sin(x0)"), &e("cos(x1) + sin(x2)"), &e("sin(x0 + x2)"))
        .unwrap();
    assert!((d - a).abs() < 1e-12 * (1.0 + a), "{d} vs {a}");
}

#[test]
fn hamiltonian_flow_preserves_the_contact_structure() {
    let f = e("sin(x0)*cos(x1) + cos(x2)");
    let defects: Vec<f64> = [16, 32]
        .iter()
        .map(|&r| {
            let s = side(r, Side::Alpha);
            s.lie_derivative_defect(&s.hamiltonian_field(&f).unwrap())
        })
        .collect();
    assert!(defects.iter().all(|d| *d < 1e-2), "{defects:?}");
}

#[test]
fn grid_fields_agree_with_symbolic_ones() {
    let s = side(32, Side::Alpha);
    let f = e("sin(x0) + cos(x1)");
    let (vals, _) = s.sample(&f).unwrap();
    let g = e("cos(x2)");
    let ScalarField::Grid(a) = s.jacobi_bracket(&f, &g).unwrap() else { unreachable!() };
    let ScalarField::Grid(b) = s.jacobi_bracket(&ScalarField::Grid(vals), &g).unwrap() else { unreachable!() };
    let gap = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(gap < 0.05, "{gap}");
}

#[test]
fn jacobi_identity_with_a_constant_and_a_repeat() {
    let s = side(32, Side::Alpha);
    let one = e("1");
    let (f, g) = (e("sin(x0)"), e("cos(x1) + sin(x2)"));
    assert!(s.jacobi_identity_defect(&one, &f, &g).unwrap() < 0.05);
    assert!(s.jacobi_identity_defect(&f, &f, &g).unwrap() < 1e-12);
}
