//! Model construction checks: chain cover combinatorics, local-term
//! algebra against an independent eigen-oracle, full-Hamiltonian
//! assembly, and initial-state structure.

mod support;

use gauge_dynamics::linalg::{embed_local, ComplexMatrix};
use gauge_dynamics::model::{
    assemble_full_hamiltonian, build_chain_cover, plus_x_state, sigma_x, tfim_local_term,
    tfim_patch_terms, ModelSpec,
};
use num_complex::Complex64;
use support::*;

fn spec(l: usize, h_x: f64, h_z: f64) -> ModelSpec {
    ModelSpec::new(l, 1.0, h_x, h_z).unwrap()
}

// ------------------------------------------------------------ chain cover

#[test]
fn three_site_cover_is_fully_overlapping() {
    let cover = build_chain_cover(3).unwrap();
    assert_eq!(cover.len(), 3);
    assert_eq!(cover.patch(0).sites, vec![0, 1]);
    assert_eq!(cover.patch(1).sites, vec![1, 2]);
    assert_eq!(cover.patch(2).sites, vec![2, 0]);
    for i in 0..3 {
        assert_eq!(cover.overlapping(i), &[0, 1, 2]);
    }
}

#[test]
fn four_site_cover_has_disjoint_opposites() {
    let cover = build_chain_cover(4).unwrap();
    assert_eq!(cover.overlapping(0), &[0, 1, 3]);
    assert!(!cover.overlapping(0).contains(&2));
    assert_eq!(cover.overlapping(2), &[1, 2, 3]);
}

#[test]
fn ten_site_cover_has_degree_three() {
    let cover = build_chain_cover(10).unwrap();
    assert_eq!(cover.len(), 10);
    for i in 0..10 {
        let ov = cover.overlapping(i);
        assert_eq!(ov.len(), 3, "patch {i} overlaps {ov:?}");
        assert!(ov.contains(&i));
        assert!(ov.contains(&((i + 1) % 10)));
        assert!(ov.contains(&((i + 9) % 10)));
    }
}

#[test]
fn overlap_relation_is_symmetric_and_reflexive() {
    let cover = build_chain_cover(7).unwrap();
    for i in 0..7 {
        assert!(cover.overlapping(i).contains(&i));
        for &j in cover.overlapping(i) {
            assert!(cover.overlapping(j).contains(&i));
        }
    }
}

#[test]
fn short_chains_are_rejected() {
    assert!(build_chain_cover(2).is_err());
    assert!(build_chain_cover(0).is_err());
}

// ------------------------------------------------------------ local terms

#[test]
fn pure_ising_term_is_diagonal() {
    let term = tfim_local_term(&spec(4, 0.0, 0.0));
    let expected = ComplexMatrix::from_fn(4, 4, |i, j| {
        if i != j {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new([-1.0, 1.0, 1.0, -1.0][i], 0.0)
        }
    });
    assert!(max_abs_diff(&term, &expected) == 0.0);
}

#[test]
fn critical_term_spectrum_matches_eigen_oracle() {
    // −σᶻσᶻ − ½(σˣ⊗1 + 1⊗σˣ) has spectrum {−√2, −1, 1, √2}: the states
    // (01−10)/√2 and (00−11)/√2 sit at +1 and −1, and the remaining
    // symmetric pair mixes into ±√2.
    let term = tfim_local_term(&spec(4, 1.0, 0.0));
    let (values, _) = eigh(&term);
    let sqrt2 = std::f64::consts::SQRT_2;
    let expected = [-sqrt2, -1.0, 1.0, sqrt2];
    for (v, e) in values.iter().zip(expected) {
        assert!((v - e).abs() <= 1e-12, "eigenvalue {v} vs {e}");
    }
}

#[test]
fn local_terms_are_hermitian() {
    for (h_x, h_z) in [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.3, 0.7)] {
        let term = tfim_local_term(&spec(5, h_x, h_z));
        assert!(term.hermiticity_residual() <= 1e-12);
    }
}

#[test]
fn embedded_terms_are_translation_covariant() {
    let l = 5;
    let cover = build_chain_cover(l).unwrap();
    let model = spec(l, 1.0, 0.4);
    let terms = tfim_patch_terms(&model, &cover).unwrap();
    let base_embedded = embed_local(&terms[0].matrix, &cover.patch(0).sites, l).unwrap();
    for (k, term) in terms.iter().enumerate().skip(1) {
        let embedded = embed_local(&term.matrix, &cover.patch(k).sites, l).unwrap();
        // Relabel sites s → s+k (mod l) on the base embedding and compare.
        let dim = 1usize << l;
        let relabel = |idx: usize| -> usize {
            let mut out = 0usize;
            for s in 0..l {
                out |= ((idx >> s) & 1) << ((s + k) % l);
            }
            out
        };
        let mut shifted = ComplexMatrix::new_zero(dim, dim);
        for r in 0..dim {
            for c in 0..dim {
                shifted.set(relabel(r), relabel(c), base_embedded.get(r, c));
            }
        }
        assert!(max_abs_diff(&embedded, &shifted) == 0.0, "patch {k}");
    }
}

// ---------------------------------------------------------- full assembly

#[test]
fn classical_ring_is_diagonal_with_ground_energy_minus_l() {
    let h = assemble_full_hamiltonian(&spec(3, 0.0, 0.0)).unwrap();
    let mut min_diag = f64::INFINITY;
    for i in 0..8 {
        for j in 0..8 {
            if i != j {
                assert_eq!(h.get(i, j), Complex64::new(0.0, 0.0));
            }
        }
        min_diag = min_diag.min(h.get(i, i).re);
    }
    assert_eq!(min_diag, -3.0);
    assert_eq!(h.get(0, 0).re, -3.0, "all-up state is a ground state");
}

#[test]
fn critical_chain_spectrum_matches_independent_assembly() {
    // Assemble the L=3 critical Hamiltonian two ways — the library path
    // and a naive sum of explicitly embedded bond terms — and compare
    // their spectra through the Jacobi oracle.
    let model = spec(3, 1.0, 0.0);
    let h = assemble_full_hamiltonian(&model).unwrap();

    let cover = build_chain_cover(3).unwrap();
    let bond = tfim_local_term(&model);
    let mut oracle_h = ComplexMatrix::new_zero(8, 8);
    for patch in cover.patches() {
        let embedded = naive_embed(&bond, &patch.sites, 3);
        oracle_h = oracle_h.add(&embedded).unwrap();
    }
    assert!(max_abs_diff(&h, &oracle_h) <= 1e-12);

    let (fast_spectrum, _) = eigh(&h);
    let (oracle_spectrum, _) = eigh(&oracle_h);
    for (a, b) in fast_spectrum.iter().zip(&oracle_spectrum) {
        assert!((a - b).abs() <= 1e-10);
    }
}

#[test]
fn plus_x_energy_counts_transverse_field_only() {
    let h = assemble_full_hamiltonian(&spec(4, 1.0, 1.0)).unwrap();
    let psi = plus_x_state(4).unwrap();
    let e = naive_expectation(&h, &psi);
    assert!((e - (-4.0)).abs() <= 1e-12);
}

#[test]
fn patch_sum_equals_full_hamiltonian() {
    for (l, h_x, h_z) in [(3, 1.0, 0.0), (4, 1.0, 1.0), (5, 0.7, 0.2)] {
        let model = spec(l, h_x, h_z);
        let cover = build_chain_cover(l).unwrap();
        let terms = tfim_patch_terms(&model, &cover).unwrap();
        let mut summed = ComplexMatrix::new_zero(1 << l, 1 << l);
        for term in &terms {
            let sites = &cover.patch(term.patch).sites;
            let embedded = embed_local(&term.matrix, sites, l).unwrap();
            summed = summed.add(&embedded).unwrap();
        }
        let full = assemble_full_hamiltonian(&model).unwrap();
        assert!(max_abs_diff(&summed, &full) <= 1e-12, "L={l}");
        assert!(full.hermiticity_residual() <= 1e-12);
    }
}

// ----------------------------------------------------------- plus_x state

#[test]
fn plus_x_amplitudes_are_uniform() {
    let one = plus_x_state(1).unwrap();
    for a in one.amplitudes() {
        assert!((a - Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
    }
    let two = plus_x_state(2).unwrap();
    for a in two.amplitudes() {
        assert!((a - Complex64::new(0.5, 0.0)).norm() < 1e-15);
    }
}

#[test]
fn plus_x_is_normalized_with_unit_sx_everywhere() {
    let l = 10;
    let psi = plus_x_state(l).unwrap();
    assert!((psi.norm() - 1.0).abs() <= 1e-12);
    for site in 0..l {
        let op = embed_local(&sigma_x(), &[site], l).unwrap();
        let sx = naive_expectation(&op, &psi);
        assert!((sx - 1.0).abs() <= 1e-12, "site {site}");
    }
}
