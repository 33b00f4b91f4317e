use lgplate::element::{
    element_energy, element_internal_forces, element_initial_stress_matrix, element_tangent, quadrature_data,
    ElementDofVector, ElementQuadrature, Kinematics,
};
use lgplate::material::{layer_stiffnesses, LayerStiffness};
use lgplate::model::{build_mesh, BoundaryConditionSet, EdgeCondition, LaminateSpec, LayerSpec, LoadCase};
use lgplate::solver::PlateProblem;
use lgplate::verify::{fd_check_element, fd_check_global, fd_consistency};
use nalgebra::DMatrix;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

// Unit-scale material and geometry so membrane, bending, shear and the
// deflection-squared terms are all of order one.
fn unit_layer() -> LayerStiffness {
    layer_stiffnesses(&LayerSpec::glass(0.3, 1.0, 0.25).unwrap()).unwrap()
}

fn distorted_element() -> ElementQuadrature {
    quadrature_data(&[[0.0, 0.0], [1.1, 0.1], [1.25, 0.95], [-0.1, 1.05]]).unwrap()
}

fn random_state(rng: &mut StdRng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

#[test]
fn element_zero_state() {
    let r = ElementDofVector::zeros();
    let report = fd_check_element(&unit_layer(), &distorted_element(), &r, Kinematics::VonKarman, 1e-5);
    assert!(report.max() < 1e-9, "{report:?}");
}

#[test]
fn element_random_states() {
    let (stiffness, quad) = (unit_layer(), distorted_element());
    let mut rng = StdRng::seed_from_u64(11);
    for _ in 0..20 {
        let r = ElementDofVector::from_slice(&random_state(&mut rng, 20));
        for kin in [Kinematics::Linear, Kinematics::VonKarman] {
            let report = fd_check_element(&stiffness, &quad, &r, kin, 1e-5);
            assert!(report.max() < 1e-6, "{kin:?}: {report:?}");
        }
    }
}

#[test]
fn dropping_initial_stress_is_detected() {
    let (stiffness, quad) = (unit_layer(), distorted_element());
    let mut rng = StdRng::seed_from_u64(12);
    for _ in 0..20 {
        let r = random_state(&mut rng, 20);
        let ev = |x: &[f64]| ElementDofVector::from_slice(x);
        let report = fd_consistency(
            &r,
            1e-5,
            |x| element_energy(&stiffness, &quad, &ev(x), Kinematics::VonKarman),
            |x| element_internal_forces(&stiffness, &quad, &ev(x), Kinematics::VonKarman).as_slice().to_vec(),
            |x| {
                let k = element_tangent(&stiffness, &quad, &ev(x), Kinematics::VonKarman)
                    - element_initial_stress_matrix(&stiffness, &quad, &ev(x));
                DMatrix::from_column_slice(20, 20, k.as_slice())
            },
        );
        assert!(report.gradient < 1e-6);
        assert!(report.hessian > 1e-2, "mutation slipped through: {report:?}");
    }
}

fn small_problem(kinematics: Kinematics) -> PlateProblem {
    let ply = LayerSpec::glass(0.3, 1.0, 0.25).unwrap();
    let inter = LayerSpec::interlayer(0.1, 0.05, 0.45).unwrap();
    let lam = LaminateSpec::new(vec![ply, inter, ply], 2.0, 1.6).unwrap();
    let mesh = build_mesh(2.0, 1.6, 3, 2).unwrap();
    let bcs = BoundaryConditionSet::new(
        EdgeCondition::SimplySupported,
        EdgeCondition::Free,
        EdgeCondition::Clamped,
        EdgeCondition::SimplySupported,
    )
    .unwrap();
    PlateProblem::new(lam, mesh, bcs, LoadCase::pressure_on(3, 0, 0.1).unwrap(), kinematics).unwrap()
}

#[test]
fn global_random_states() {
    let mut rng = StdRng::seed_from_u64(13);
    for kin in [Kinematics::Linear, Kinematics::VonKarman] {
        let problem = small_problem(kin);
        let zero = vec![0.0; problem.n_dofs()];
        assert!(fd_check_global(&problem, &zero, 1e-5).unwrap().max() < 1e-9);
        for _ in 0..20 {
            let r = random_state(&mut rng, problem.n_dofs());
            let report = fd_check_global(&problem, &r, 1e-5).unwrap();
            assert!(report.max() < 1e-6, "{kin:?}: {report:?}");
        }
    }
}

#[test]
fn global_tangent_is_symmetric() {
    let problem = small_problem(Kinematics::VonKarman);
    let mut rng = StdRng::seed_from_u64(14);
    let r = random_state(&mut rng, problem.n_dofs());
    let (k, _) = problem.assemble_global(&r).unwrap();
    assert!(k.asymmetry() < 1e-12 * k.row_sum_norm());
}

#[test]
fn global_dimension_checked() {
    let problem = small_problem(Kinematics::Linear);
    assert!(fd_check_global(&problem, &[0.0; 3], 1e-5).is_err());
}
