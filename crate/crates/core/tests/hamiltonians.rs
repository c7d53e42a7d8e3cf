use mollow_core::hilbert::{annihilation, embed};
use mollow_core::liouvillian::{jc_hamiltonian, oms_hamiltonian, ModelParams};
use mollow_core::SparseOperator;
use nalgebra::{Complex, DMatrix};

fn hermitian_spectrum(op: &SparseOperator<f64>, keep: impl Fn(usize) -> bool) -> Vec<f64> {
    let idx: Vec<usize> = (0..op.dim()).filter(|&i| keep(i)).collect();
    let m = DMatrix::from_fn(idx.len(), idx.len(), |r, c| {
        let v = op.get(idx[r], idx[c]);
        Complex::new(v.re, v.im)
    });
    let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

#[test]
fn jc_single_excitation_doublet() {
    for &(delta, g) in &[(0.0, 0.3), (1.5, 0.01), (-2.0, 3.0)] {
        let p = ModelParams::<f64> { n_cavity: 4, delta, g, ..Default::default() };
        let h = jc_hamiltonian(&p).unwrap();
        let space = h.space().clone();
        // One excitation shared by cavity and atom, source in its ground state.
        let ev = hermitian_spectrum(&h, |i| {
            let l = space.levels_of(i);
            l[0] == 0 && l[1] + l[2] == 1
        });
        assert_eq!(ev.len(), 2);
        assert!((ev[0] - (delta - g)).abs() < 1e-12, "{ev:?}");
        assert!((ev[1] - (delta + g)).abs() < 1e-12, "{ev:?}");
    }
}

#[test]
fn radiation_pressure_conserves_photon_number() {
    let p = ModelParams::<f64> { n_cavity: 4, n_mech: 6, g_m: 0.7, delta: 0.4, ..Default::default() };
    let h = oms_hamiltonian(&p).unwrap();
    let a = embed(&annihilation::<f64>(4).unwrap(), h.space(), 1).unwrap();
    let na = a.dagger().matmul(&a).unwrap();
    assert!(h.commutator(&na).unwrap().max_abs() < 1e-14);
}

#[test]
fn polaron_shift_of_photon_sectors() {
    let (g_m, omega_m) = (0.3, 5.0);
    let p = ModelParams::<f64> { n_cavity: 3, n_mech: 30, g_m, omega_m, ..Default::default() };
    let h = oms_hamiltonian(&p).unwrap();
    let space = h.space().clone();
    for n in 0..3usize {
        let ev = hermitian_spectrum(&h, |i| {
            let l = space.levels_of(i);
            l[0] == 0 && l[1] == n
        });
        let expected = -g_m * g_m * (n * n) as f64 / omega_m;
        assert!((ev[0] - expected).abs() < 1e-10, "n={n}: {} vs {expected}", ev[0]);
        // Ladder spacing above the displaced ground state is omega_m.
        assert!((ev[1] - ev[0] - omega_m).abs() < 1e-8);
    }
}
