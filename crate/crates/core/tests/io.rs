use std::sync::Arc;

use branching_kms::catalog::{self, random};
use branching_kms::io::*;
use branching_kms::{
    extend_down, BigRational, EdgeId, EdgeThermal, Extended, LinkEngine, PathSampler, VertexId,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

#[test]
fn flow_document_defaults() {
    let doc = json!({
        "levels": [["1"], ["a", "b"], ["c"]],
        "edges": [
            {"from": [0, "1"], "to": [1, "a"]},
            {"from": [0, "1"], "to": [1, "b"], "m": 2, "rho": ["1/2", "1/4"]},
            {"from": [1, "a"], "to": [2, "c"], "Z": "inf"},
            {"from": [1, "b"], "to": [2, "c"], "spectrum": [0]}
        ]
    });
    let f = flow_from_json::<BigRational>(&doc, None).unwrap();
    assert_eq!(f.beta(), &q(0, 1));
    assert_eq!(
        f.thermal(EdgeId { level: 1, index: 0 }),
        &EdgeThermal::Spectrum(vec![q(0, 1)])
    );
    assert_eq!(
        f.thermal(EdgeId { level: 1, index: 1 }),
        &EdgeThermal::Boltzmann(vec![q(1, 2), q(1, 4)])
    );
    let t = f.vertex_partition().unwrap();
    assert_eq!(t.vertex_z(VertexId::new(1, 1)), &Extended::Finite(q(3, 4)));
    assert_eq!(t.vertex_z(VertexId::new(2, 0)), &Extended::Infinite);

    let hot = flow_from_json::<f64>(&doc, Some(2.5)).unwrap();
    assert_eq!(*hot.beta(), 2.5);
    let mut with_beta = doc.clone();
    with_beta["beta"] = json!("3/2");
    assert_eq!(
        *flow_from_json::<f64>(&with_beta, None).unwrap().beta(),
        1.5
    );
    assert_eq!(
        *flow_from_json::<f64>(&with_beta, Some(1.0)).unwrap().beta(),
        1.0
    );
}

#[test]
fn malformed_documents_are_rejected() {
    assert!(graph_from_json(&json!([])).is_err());
    assert!(graph_from_json(&json!({"levels": []})).is_err());
    let skip =
        json!({"levels": [["1"], ["a"], ["b"]], "edges": [{"from": [0, "1"], "to": [2, "b"]}]});
    assert!(graph_from_json(&skip).is_err());
    let unknown = json!({"levels": [["1"], ["a"]], "edges": [{"from": [0, "1"], "to": [1, "zz"]}]});
    assert!(graph_from_json(&unknown).is_err());
    let bad_spec = json!({"levels": [["1"], ["a"]], "edges": [{"from": [0, "1"], "to": [1, "a"], "spectrum": 3}]});
    assert!(flow_from_json::<f64>(&bad_spec, None).is_err());
    let wrong_len = json!({"levels": [["1"], ["a"]], "edges": [{"from": [0, "1"], "to": [1, "a"], "m": 2, "spectrum": [1]}]});
    assert!(flow_from_json::<f64>(&wrong_len, None).is_err());
    assert!(parse_json("{not json").is_err());
}

#[test]
fn numeric_labels_and_keys() {
    let g = graph_from_json(&json!({
        "levels": [[1], [0, 1]],
        "edges": [{"from": [0, 1], "to": [1, 0]}, {"from": [0, 1], "to": [1, 1]}]
    }))
    .unwrap();
    assert_eq!(g.label(VertexId::new(1, 1)), "1");
    assert_eq!(vertex_from_key(&g, "[1,0]").unwrap(), VertexId::new(1, 0));
    assert!(vertex_from_key(&g, "[2,0]").is_err());
    let y = catalog::young(3).unwrap();
    assert_eq!(
        vertex_from_key(&y, "[3,(2,1)]").unwrap(),
        y.vertex(3, "(2,1)").unwrap()
    );
    assert_eq!(y.vertex_key(VertexId::new(0, 0)), "[0,()]");
}

#[test]
fn scalars_in_both_modes() {
    assert_eq!(scalar_to_json(&q(2, 3)), json!("2/3"));
    assert_eq!(scalar_to_json(&q(4, 1)), json!("4"));
    assert_eq!(
        scalar_from_json::<BigRational>(&json!("0.125")).unwrap(),
        q(1, 8)
    );
    assert_eq!(
        scalar_from_json::<BigRational>(&json!(0.5)).unwrap(),
        q(1, 2)
    );
    assert_eq!(scalar_from_json::<f64>(&json!("1/4")).unwrap(), 0.25);
    assert_eq!(scalar_to_json(&0.1f64), json!(0.1));
    assert_eq!(extended_to_json::<f64>(&Extended::Infinite), json!("inf"));
    assert_eq!(
        extended_from_json::<f64>(&json!("inf")).unwrap(),
        Extended::Infinite
    );
    assert!(scalar_from_json::<BigRational>(&json!("1/0")).is_err());
    assert!(scalar_from_json::<f64>(&json!(true)).is_err());
}

#[test]
fn partition_document_lists_classes() {
    let doc = json!({
        "levels": [["1"], ["a", "b"]],
        "edges": [
            {"from": [0, "1"], "to": [1, "a"], "Z": "inf"},
            {"from": [0, "1"], "to": [1, "b"], "m": 3}
        ]
    });
    let f = flow_from_json::<BigRational>(&doc, None).unwrap();
    let out = partition_to_json(&f.vertex_partition().unwrap(), f.graph());
    assert_eq!(out["vertex"]["[1,a]"], json!("inf"));
    assert_eq!(out["vertex"]["[1,b]"], json!("3"));
    assert_eq!(out["classes"][1]["finite"], json!(["[1,b]"]));
    assert_eq!(out["classes"][1]["infinite"], json!(["[1,a]"]));
    assert_eq!(out["edges"][1]["Z"], json!("3"));
}

#[test]
fn tables_have_headers() {
    let f = catalog::pascal_flow(3, q(0, 1)).unwrap();
    let engine = LinkEngine::new(&f).unwrap();
    let k = engine.matrix(3, 2).unwrap();
    let (header, rows) = link_to_table(&k, f.graph());
    assert_eq!(header, vec!["vertex", "[2,0]", "[2,1]", "[2,2]"]);
    assert_eq!(rows[1], vec!["[3,1]", "1/3", "2/3", "0"]);

    let nu = catalog::bernoulli_system(3, q(1, 2)).unwrap();
    let path: Vec<_> = (1..=3).map(|m| VertexId::new(m, m / 2)).collect();
    let t = branching_kms::ergodic_experiment(&engine, Some(&nu), &[VertexId::new(1, 1)], &path)
        .unwrap();
    let (header, rows) = ergodic_to_table(&t, f.graph());
    assert_eq!(header, vec!["m", "[1,1]", "deviation"]);
    assert_eq!(rows[2], vec!["3", "1/3", "1/6"]);
}

#[test]
fn path_documents() {
    let f = catalog::young_flow(4, 0.0).unwrap();
    let engine = LinkEngine::new(&f).unwrap();
    let nu = catalog::plancherel_system(4).unwrap();
    let p = PathSampler::new(3).sample_up(&engine, &nu, 4).unwrap();
    let doc = path_to_json(&p, f.graph());
    assert_eq!(doc["seed"], json!(3));
    assert_eq!(doc["draw"], json!(0));
    assert_eq!(path_from_json(&doc, f.graph()).unwrap(), p.vertices);
    assert_eq!(path_from_json(&doc["path"], f.graph()).unwrap(), p.vertices);
    assert!(path_from_json(&json!(3), f.graph()).is_err());
}

#[test]
fn measures_must_sit_on_one_level() {
    let g = catalog::pascal(2).unwrap();
    let mu =
        measure_from_json::<BigRational>(&json!({"[2,0]": "1/4", "[2,2]": "3/4"}), &g).unwrap();
    assert_eq!(mu.weights, vec![q(1, 4), q(0, 1), q(3, 4)]);
    assert!(measure_from_json::<f64>(&json!({"[2,0]": 0.5, "[1,0]": 0.5}), &g).is_err());
    assert!(measure_from_json::<f64>(&json!({}), &g).is_err());
    assert!(measure_from_json::<f64>(&json!({"[2,0]": 0.5}), &g).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn float_flows_round_trip(seed in any::<u64>(), beta in -3.0f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = Arc::new(random::graph(&mut rng, 4, 4, 3));
        let f = random::spectral_flow(&mut rng, g.clone(), beta);
        let f = random::with_infinite_edges(&mut rng, &f, 0.2).unwrap();
        let text = serde_json::to_string(&flow_to_json(&f)).unwrap();
        let back = flow_from_json::<f64>(&parse_json(&text).unwrap(), None).unwrap();
        prop_assert_eq!(back.graph(), f.graph());
        prop_assert_eq!(back.thermal_map(), f.thermal_map());
        prop_assert_eq!(back.beta(), f.beta());
        prop_assert_eq!(graph_from_json(&graph_to_json(&g)).unwrap(), (*g).clone());
    }

    #[test]
    fn exact_documents_round_trip(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = Arc::new(random::graph(&mut rng, 4, 3, 2));
        let f = random::boltzmann_flow::<BigRational, _>(&mut rng, g.clone(), q(1, 3));
        let back = flow_from_json::<BigRational>(&flow_to_json(&f), None).unwrap();
        prop_assert_eq!(back.thermal_map(), f.thermal_map());

        let engine = LinkEngine::new(&f).unwrap();
        let mu = random::level_measure(&mut rng, &engine, 4);
        prop_assert_eq!(&measure_from_json::<BigRational>(&measure_to_json(&mu, &g), &g).unwrap(), &mu);
        let nu = extend_down(&engine, &mu).unwrap();
        prop_assert_eq!(system_from_json::<BigRational>(&system_to_json(&nu, &g), &g).unwrap(), nu);

        let k = engine.matrix(4, 2).unwrap();
        let back = link_from_json::<BigRational>(&link_to_json(&k, &g), &g).unwrap();
        prop_assert_eq!(back.entries, k.entries);

        let link = random::link::<BigRational, _>(&mut rng, g.clone());
        let back = link_spec_from_json::<BigRational>(&link_spec_to_json(&link)).unwrap();
        prop_assert_eq!(back.weights(), link.weights());
    }
}
