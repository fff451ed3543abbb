use std::sync::Arc;

use branching_kms::catalog::{self, random};
use branching_kms::{
    realize_link, verify_realization, AbstractLink, BigRational, EdgeId, EdgeThermal, Error,
    FlowSpec, GraphBuilder, LinkEngine, SpectrumStyle,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// `sum_j exp(-beta lambda_j)` straight from the stored spectrum.
fn edge_value(flow: &FlowSpec<f64>, e: EdgeId) -> f64 {
    match flow.thermal(e) {
        EdgeThermal::Spectrum(v) => v.iter().map(|l| (-flow.beta() * l).exp()).sum(),
        EdgeThermal::Boltzmann(w) => w.iter().sum(),
        EdgeThermal::PartitionOnly(_) => panic!("realization never emits bare partition values"),
    }
}

fn fork() -> Arc<branching_kms::GradedGraph> {
    Arc::new(
        GraphBuilder::new()
            .vertex(0, "1")
            .vertex(1, "a")
            .vertex(1, "b")
            .vertex(2, "c")
            .edge(1, "1", "a", 1)
            .edge(1, "1", "b", 2)
            .edge(2, "a", "c", 3)
            .edge(2, "b", "c", 1)
            .build()
            .unwrap(),
    )
}

fn fork_link<S: branching_kms::Scalar>() -> AbstractLink<S> {
    let g = fork();
    let w = g.edge_map_with(|e, edge| {
        if e.level == 1 {
            S::one()
        } else if edge.source == 0 {
            S::from_ratio(1, 4)
        } else {
            S::from_ratio(3, 4)
        }
    });
    AbstractLink::new(g, w).unwrap()
}

#[test]
fn abstract_links_are_validated() {
    let g = fork();
    let bad_row = g.edge_map_with(|e, _| if e.level == 1 { 1.0 } else { 0.4 });
    assert!(AbstractLink::new(g.clone(), bad_row).is_err());
    let zero = g.edge_map_with(|e, edge| {
        if e.level == 2 && edge.source == 0 {
            0.0
        } else {
            1.0
        }
    });
    assert!(AbstractLink::new(g.clone(), zero).is_err());
    let k = fork_link::<f64>();
    assert_eq!(*k.weight(EdgeId { level: 2, index: 1 }), 0.75);
    assert_eq!(k.weights().level(1), &[1.0, 1.0]);
}

#[test]
fn realized_spectra_have_the_prescribed_traces() {
    let k = fork_link::<f64>();
    for beta in [-2.0, -1.0, 0.5, 3.0] {
        for style in [SpectrumStyle::Uniform, SpectrumStyle::Geometric(0.5)] {
            let flow = realize_link(&k, &beta, &style).unwrap();
            for e in k.graph().all_edge_ids() {
                assert!((edge_value(&flow, e) - k.weight(e)).abs() < 1e-12);
            }
            let report = verify_realization(&flow, &k, &1e-12).unwrap();
            assert!(report.passed(), "{report:?}");
        }
    }
    // geometric weights 1 : 2 : 4 on the triple edge
    let flow = realize_link(&k, &1.0, &SpectrumStyle::Geometric(2.0)).unwrap();
    let w = flow.edge_weights(EdgeId { level: 2, index: 0 }).unwrap();
    for (x, y) in w.iter().zip([1.0 / 28.0, 2.0 / 28.0, 4.0 / 28.0]) {
        assert!((x - y).abs() < 1e-15);
    }
}

#[test]
fn exact_realization_stores_boltzmann_weights() {
    let k = fork_link::<BigRational>();
    let flow = realize_link(&k, &q(2, 1), &SpectrumStyle::Uniform).unwrap();
    assert_eq!(
        flow.thermal(EdgeId { level: 1, index: 0 }),
        &EdgeThermal::Spectrum(vec![q(0, 1)])
    );
    assert_eq!(
        flow.thermal(EdgeId { level: 1, index: 1 }),
        &EdgeThermal::Boltzmann(vec![q(1, 2), q(1, 2)])
    );
    let report = verify_realization(&flow, &k, &q(0, 1)).unwrap();
    assert!(report.passed());
    assert_eq!(report.max_partition_defect, Some(q(0, 1)));
}

#[test]
fn parameter_errors() {
    let k = fork_link::<f64>();
    assert!(matches!(
        realize_link(&k, &0.0, &SpectrumStyle::Uniform),
        Err(Error::BetaZero)
    ));
    assert!(realize_link(&k, &1.0, &SpectrumStyle::Geometric(-1.0)).is_err());
    let other = catalog::pascal_flow(2, 1.0).unwrap();
    assert!(matches!(
        verify_realization(&other, &k, &1e-12),
        Err(Error::GraphMismatch)
    ));
}

#[test]
fn perturbed_eigenvalue_is_detected() {
    let k = fork_link::<f64>();
    let flow = realize_link(&k, &1.0, &SpectrumStyle::Uniform).unwrap();
    let mut thermal = flow.thermal_map().clone();
    let target = EdgeId { level: 2, index: 1 };
    if let EdgeThermal::Spectrum(v) = &mut thermal[target] {
        v[0] += 0.1;
    }
    let bent = FlowSpec::new(flow.graph_arc().clone(), 1.0, thermal).unwrap();
    let report = verify_realization(&bent, &k, &1e-12).unwrap();
    assert!(!report.link_ok);
    assert!(!report.partition_ok);
    // Z(c) drops to 1/4 + 3/4 e^{-0.1}; both incoming links move by the same amount
    let zc = 0.25 + 0.75 * (-0.1f64).exp();
    let expected = (0.25 / zc - 0.25).abs();
    assert!((report.max_link_defect - expected).abs() < 1e-12);
    assert!((report.max_partition_defect.unwrap() - (1.0 - zc)).abs() < 1e-12);
}

#[test]
fn gauge_breaks_normalization_but_not_the_link() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let g = Arc::new(catalog::young(5).unwrap());
    let k = random::link::<f64, _>(&mut rng, g.clone());
    let flow = realize_link(&k, &1.5, &SpectrumStyle::Uniform).unwrap();
    let shifts = random::gauge::<f64, _>(&mut rng, &g);
    let gauged = flow.apply_gauge(&shifts).unwrap();
    let report = verify_realization(&gauged, &k, &1e-12).unwrap();
    assert!(report.link_ok);
    assert!(!report.partition_ok);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn random_links_round_trip(seed in any::<u64>(), beta in prop::sample::select(vec![-2.0, -1.0, 1.0, 2.0])) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = Arc::new(random::graph(&mut rng, 4, 3, 3));
        let k = random::link::<f64, _>(&mut rng, g.clone());
        let uniform = realize_link(&k, &beta, &SpectrumStyle::Uniform).unwrap();
        let geometric = realize_link(&k, &(beta * 0.5), &SpectrumStyle::Geometric(0.3)).unwrap();
        for flow in [&uniform, &geometric] {
            let report = verify_realization(flow, &k, &1e-12).unwrap();
            prop_assert!(report.passed());
            // independent check: vertex partition by path sums is one
            for z in g.all_vertices() {
                let total: f64 = g
                    .enumerate_paths(z)
                    .unwrap()
                    .iter()
                    .map(|p| {
                        p.iter()
                            .enumerate()
                            .map(|(l, &i)| edge_value(flow, EdgeId { level: l + 1, index: i }))
                            .product::<f64>()
                    })
                    .sum();
                prop_assert!((total - 1.0).abs() < 1e-12);
            }
        }
        let (a, b) = (LinkEngine::new(&uniform).unwrap(), LinkEngine::new(&geometric).unwrap());
        for n in 1..=4 {
            let (x, y) = (a.matrix(n, 0).unwrap(), b.matrix(n, 0).unwrap());
            for (r, s) in x.entries.iter().zip(&y.entries) {
                for (u, v) in r.iter().zip(s) {
                    prop_assert!((u - v).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn exact_links_round_trip(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = Arc::new(random::graph(&mut rng, 4, 3, 3));
        let k = random::link::<BigRational, _>(&mut rng, g.clone());
        for style in [SpectrumStyle::Uniform, SpectrumStyle::Geometric(q(1, 2))] {
            let flow = realize_link(&k, &q(-1, 1), &style).unwrap();
            let report = verify_realization(&flow, &k, &q(0, 1)).unwrap();
            prop_assert!(report.passed());
            prop_assert_eq!(report.max_partition_defect, Some(q(0, 1)));
        }
    }
}
