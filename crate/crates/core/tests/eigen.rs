use pseudovem::assembly::{assemble_system, residual_norm};
use pseudovem::eigensolve::{dense_pencil_eigenvalues, solve_smallest, EigenOptions, SolverPath};
use pseudovem::polymesh::{generate_mesh, Domain, FamilyTag, MeshFamily};
use pseudovem::vemlocal::Material;
use pseudovem::System;

fn system(tag: FamilyTag, n: usize, domain: Domain, nu: f64, gamma: f64) -> System {
    let mesh = generate_mesh(&MeshFamily::new(tag), n, domain).unwrap();
    assemble_system(&mesh, &Material::new(1.0, nu).unwrap(), gamma).unwrap()
}

fn krylov() -> EigenOptions {
    EigenOptions { path: SolverPath::Krylov, ..EigenOptions::default() }
}

#[test]
fn krylov_agrees_with_dense_pencil() {
    let cases = [
        (FamilyTag::T1Triangles, 4, Domain::UnitSquare, 0.35, 1.0),
        (FamilyTag::T2Hexagons, 4, Domain::UnitSquare, 0.49, 0.125),
        (FamilyTag::T3DistortedSquares, 3, Domain::LShape, 0.5, 1.0),
        (FamilyTag::T4Voronoi, 6, Domain::UnitSquare, 0.3, 8.0),
        (FamilyTag::T5DistortedHexagons, 3, Domain::UnitSquare, 0.5, 1.0),
        (FamilyTag::T6Disk, 20, Domain::UnitDisk, 0.5, 1.0),
    ];
    for (tag, n, domain, nu, gamma) in cases {
        let sys = system(tag, n, domain, nu, gamma);
        assert!(sys.dim() <= 600, "{tag}: dimension {}", sys.dim());
        let dense = dense_pencil_eigenvalues(&sys, 1e-8).unwrap();
        // one κ per displacement unknown, minus the rigid-motion-free count
        assert!(dense.iter().all(|k| k.is_finite() && *k > 0.0));
        let res = solve_smallest(&sys, 6, &krylov()).unwrap();
        assert_eq!(res.path, SolverPath::Krylov);
        for (i, (&k, &d)) in res.kappas.iter().zip(&dense).enumerate() {
            assert!((k - d).abs() <= 1e-8 * d, "{tag} κ{}: {k} vs {d}", i + 1);
        }
        for (i, (&r, x)) in res.residuals.iter().zip(&res.eigenvectors).enumerate() {
            assert!(r <= 1e-8, "{tag} residual {}: {r}", i + 1);
            let again = residual_norm(&sys, x, res.kappas[i]).unwrap();
            assert!(again <= 1e-8, "{tag} recomputed residual {}: {again}", i + 1);
        }
    }
}

#[test]
fn dense_and_auto_paths_agree() {
    let sys = system(FamilyTag::T2Hexagons, 3, Domain::LShape, 0.4, 1.0);
    let auto = solve_smallest(&sys, 5, &EigenOptions::default()).unwrap();
    let dense = solve_smallest(&sys, 5, &EigenOptions { path: SolverPath::Dense, ..EigenOptions::default() }).unwrap();
    assert_eq!(auto.path, SolverPath::Dense);
    for (a, b) in auto.frequencies.iter().zip(&dense.frequencies) {
        assert_eq!(a, b);
    }
    for w in auto.frequencies.windows(2) {
        assert!(w[0] <= w[1]);
    }
}

#[test]
fn krylov_is_deterministic() {
    let sys = system(FamilyTag::T4Voronoi, 10, Domain::UnitSquare, 0.49, 1.0);
    let a = solve_smallest(&sys, 4, &krylov()).unwrap();
    let b = solve_smallest(&sys, 4, &krylov()).unwrap();
    assert_eq!(a.kappas, b.kappas);
}

#[test]
fn square_double_eigenvalue_forms_a_cluster() {
    // an undistorted square grid keeps the quarter-turn symmetry, so ω₁ = ω₂ at ν = 0.35
    let mesh = generate_mesh(&MeshFamily::new(FamilyTag::T3DistortedSquares).with_amplitude(0.0), 12, Domain::UnitSquare)
        .unwrap();
    let sys = assemble_system(&mesh, &Material::new(1.0, 0.35).unwrap(), 1.0).unwrap();
    let res = solve_smallest(&sys, 4, &krylov()).unwrap();
    let rel = (res.frequencies[1] - res.frequencies[0]) / res.frequencies[0];
    assert!(rel < 1e-8, "gap {rel}");
    assert!(res.clusters.iter().any(|c| c == &vec![0, 1]), "{:?}", res.clusters);
}

#[test]
fn no_locking_near_the_incompressible_limit() {
    let mesh = generate_mesh(&MeshFamily::new(FamilyTag::T1Triangles), 32, Domain::UnitSquare).unwrap();
    let w = |nu: f64| {
        let sys = assemble_system(&mesh, &Material::new(1.0, nu).unwrap(), 1.0).unwrap();
        solve_smallest(&sys, 1, &EigenOptions::default()).unwrap().frequencies[0]
    };
    let (near, limit) = (w(0.499999), w(0.5));
    assert!((near - limit).abs() / limit <= 1e-3, "{near} vs {limit}");
}

#[test]
fn invalid_requests_are_rejected() {
    let sys = system(FamilyTag::T1Triangles, 2, Domain::UnitSquare, 0.3, 1.0);
    assert!(solve_smallest(&sys, 0, &EigenOptions::default()).is_err());
    assert!(residual_norm(&sys, &[1.0], 1.0).is_err());
}

#[test]
fn zero_stabilisation_needs_triangles() {
    let hex = system(FamilyTag::T2Hexagons, 4, Domain::UnitSquare, 0.49, 0.0);
    let err = solve_smallest(&hex, 4, &EigenOptions::default()).unwrap_err();
    assert!(matches!(err, pseudovem::Error::Factorization(_)), "{err}");
    // on triangles Π and the divergence see all six local unknowns
    let tri = system(FamilyTag::T1Triangles, 4, Domain::UnitSquare, 0.49, 0.0);
    let dense = dense_pencil_eigenvalues(&tri, 1e-8).unwrap();
    let res = solve_smallest(&tri, 4, &krylov()).unwrap();
    for (k, d) in res.kappas.iter().zip(&dense) {
        assert!((k - d).abs() <= 1e-8 * d);
    }
}
