use std::collections::HashMap;
use std::sync::Arc;

use branching_kms::catalog::{self, random};
use branching_kms::{
    cylinder_prob, ergodic_experiment, extend_down, BigRational, CylinderSpec, FlowSpec,
    GraphBuilder, LevelMeasure, LinkEngine, PathSampler, VertexId,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn pow(x: &BigRational, n: usize) -> BigRational {
    (0..n).fold(q(1, 1), |acc, _| acc * x.clone())
}

/// Two-sample Kolmogorov-Smirnov statistic on integer-valued samples.
fn ks_statistic(a: &[usize], b: &[usize]) -> f64 {
    let max = a.iter().chain(b).copied().max().unwrap_or(0);
    let cdf = |s: &[usize], x: usize| s.iter().filter(|&&v| v <= x).count() as f64 / s.len() as f64;
    (0..=max)
        .map(|x| (cdf(a, x) - cdf(b, x)).abs())
        .fold(0.0, f64::max)
}

#[test]
fn bernoulli_cylinders_are_exchangeable() {
    let p = q(1, 3);
    let flow = catalog::pascal_flow(6, q(0, 1)).unwrap();
    let engine = LinkEngine::new(&flow).unwrap();
    let g = engine.graph();
    let nu = catalog::bernoulli_system(6, p.clone()).unwrap();
    // every up/right word of length 6 is a root-to-level-6 path
    for word in 0u32..64 {
        let mut k = 0;
        let mut path = Vec::new();
        for n in 1..=6 {
            k += ((word >> (n - 1)) & 1) as usize;
            path.push(VertexId::new(n, k));
        }
        let c = CylinderSpec::from_upward(g, &path).unwrap();
        let expected = pow(&p, k) * pow(&(q(1, 1) - p.clone()), 6 - k);
        assert_eq!(cylinder_prob(&engine, &nu, &c).unwrap(), expected);
    }
}

#[test]
fn up_transition_of_bernoulli_is_p() {
    let p = q(2, 5);
    let flow = catalog::pascal_flow(5, q(0, 1)).unwrap();
    let engine = LinkEngine::new(&flow).unwrap();
    let nu = catalog::bernoulli_system(5, p.clone()).unwrap();
    for n in 0..5 {
        for k in 0..=n {
            let here = VertexId::new(n, k);
            let up = VertexId::new(n + 1, k + 1);
            let step =
                nu.get(up).clone() * engine.adjacent(up, here).unwrap() / nu.get(here).clone();
            assert_eq!(step, p);
        }
    }
}

#[test]
fn cylinder_validation() {
    let g = catalog::pascal(3).unwrap();
    assert!(CylinderSpec::new(&g, vec![]).is_err());
    assert!(CylinderSpec::new(&g, vec![VertexId::new(3, 0), VertexId::new(1, 0)]).is_err());
    assert!(CylinderSpec::new(&g, vec![VertexId::new(2, 2), VertexId::new(1, 0)]).is_err());
    assert!(CylinderSpec::new(&g, vec![VertexId::new(5, 0)]).is_err());
    let c = CylinderSpec::new(&g, vec![VertexId::new(2, 1), VertexId::new(1, 0)]).unwrap();
    assert_eq!(c.top(), VertexId::new(2, 1));
    assert_eq!(c.vertices().len(), 2);

    let flow = catalog::pascal_flow(3, q(0, 1)).unwrap();
    let engine = LinkEngine::new(&flow).unwrap();
    let shallow = catalog::bernoulli_system(1, q(1, 2)).unwrap();
    assert!(cylinder_prob(&engine, &shallow, &c).is_err());
}

#[test]
fn cylinders_through_infinite_vertices_vanish() {
    let g = Arc::new(catalog::pascal(3).unwrap());
    let mut thermal = FlowSpec::ground(g.clone(), q(1, 1)).thermal_map().clone();
    let mid = g.vertex(2, "1").unwrap();
    let e = g.incoming(mid).next().unwrap();
    thermal[e] = branching_kms::EdgeThermal::PartitionOnly(branching_kms::Extended::Infinite);
    let flow = FlowSpec::new(g.clone(), q(1, 1), thermal).unwrap();
    let engine = LinkEngine::new(&flow).unwrap();
    let mu = LevelMeasure::new(3, vec![q(1, 2), q(0, 1), q(0, 1), q(1, 2)]).unwrap();
    let nu = extend_down(&engine, &mu).unwrap();
    assert_eq!(nu.get(mid), &q(0, 1));
    let c = CylinderSpec::from_upward(&g, &[VertexId::new(1, 0), mid]).unwrap();
    assert_eq!(cylinder_prob(&engine, &nu, &c).unwrap(), q(0, 1));
    let mut sampler = PathSampler::new(4);
    for _ in 0..200 {
        let path = sampler.sample_up(&engine, &nu, 3).unwrap();
        assert!(!path.vertices.contains(&mid));
    }
}

#[test]
fn chain_has_a_single_path() {
    let g = Arc::new(
        GraphBuilder::new()
            .vertex(0, "1")
            .vertex(1, "a")
            .vertex(2, "b")
            .vertex(3, "c")
            .edge(1, "1", "a", 2)
            .edge(2, "a", "b", 1)
            .edge(3, "b", "c", 3)
            .build()
            .unwrap(),
    );
    let flow = FlowSpec::ground(g.clone(), 0.5);
    let engine = LinkEngine::new(&flow).unwrap();
    let nu = extend_down(&engine, &LevelMeasure::point_mass(&g, VertexId::new(3, 0))).unwrap();
    let expected: Vec<_> = (1..=3).map(|n| VertexId::new(n, 0)).collect();
    let mut sampler = PathSampler::new(0);
    for _ in 0..10 {
        assert_eq!(
            sampler.sample_down(&engine, &nu, 3).unwrap().vertices,
            expected
        );
        assert_eq!(
            sampler.sample_up(&engine, &nu, 3).unwrap().vertices,
            expected
        );
    }
    let c = CylinderSpec::from_upward(&g, &expected).unwrap();
    assert_eq!(cylinder_prob(&engine, &nu, &c).unwrap(), 1.0);
}

#[test]
fn samplers_are_deterministic_and_count_draws() {
    let flow = catalog::young_flow(6, q(0, 1)).unwrap();
    let engine = LinkEngine::new(&flow).unwrap();
    let nu = catalog::plancherel_system(6).unwrap();
    let run = |seed| {
        let mut s = PathSampler::new(seed);
        (0..20)
            .map(|i| {
                if i % 2 == 0 {
                    s.sample_up(&engine, &nu, 6).unwrap()
                } else {
                    s.sample_down(&engine, &nu, 6).unwrap()
                }
            })
            .collect::<Vec<_>>()
    };
    let a = run(17);
    assert_eq!(a, run(17));
    assert_ne!(a, run(18));
    for (i, p) in a.iter().enumerate() {
        assert_eq!(p.seed, 17);
        assert_eq!(p.draw, i as u64);
        assert_eq!(p.vertices.len(), 6);
        for (n, v) in p.vertices.iter().enumerate() {
            assert_eq!(v.level, n + 1);
        }
    }
    let mut s = PathSampler::new(1);
    assert!(s.sample_up(&engine, &nu, 7).is_err());
    assert_eq!(s.seed(), 1);
}

#[test]
fn zero_mass_is_reported() {
    let flow = catalog::pascal_flow(2, q(0, 1)).unwrap();
    let engine = LinkEngine::new(&flow).unwrap();
    let mut nu = catalog::bernoulli_system(2, q(1, 2)).unwrap();
    for v in nu.values.0[2].iter_mut() {
        *v = q(0, 1);
    }
    let mut s = PathSampler::new(0);
    assert!(s.sample_down(&engine, &nu, 2).is_err());
}

#[test]
fn up_and_down_samplers_agree_in_law() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let g = Arc::new(random::graph(&mut rng, 6, 3, 2));
    let flow = random::spectral_flow(&mut rng, g.clone(), 0.8);
    let engine = LinkEngine::new(&flow).unwrap();
    let mu = random::level_measure::<f64, _>(&mut rng, &engine, 6);
    let nu = extend_down(&engine, &mu).unwrap();

    let samples = 10_000;
    let mut down = PathSampler::new(1);
    let mut up = PathSampler::new(2);
    let mut counts: HashMap<Vec<VertexId>, (usize, usize)> = HashMap::new();
    let (mut tops_down, mut tops_up) = (Vec::new(), Vec::new());
    let (mut mids_down, mut mids_up) = (Vec::new(), Vec::new());
    for _ in 0..samples {
        let a = down.sample_down(&engine, &nu, 6).unwrap().vertices;
        let b = up.sample_up(&engine, &nu, 6).unwrap().vertices;
        tops_down.push(a[5].index);
        tops_up.push(b[5].index);
        mids_down.push(a[2].index);
        mids_up.push(b[2].index);
        counts.entry(a).or_default().0 += 1;
        counts.entry(b).or_default().1 += 1;
    }
    // two-sample KS at the 0.1% level: c(alpha) sqrt(2/n)
    let critical = 1.95 * (2.0 / samples as f64).sqrt();
    assert!(ks_statistic(&tops_down, &tops_up) < critical);
    assert!(ks_statistic(&mids_down, &mids_up) < critical);

    for (path, (a, b)) in &counts {
        let c = CylinderSpec::from_upward(&g, path).unwrap();
        let p = cylinder_prob(&engine, &nu, &c).unwrap();
        let sd = (p * (1.0 - p) / samples as f64).sqrt();
        for observed in [*a, *b] {
            let freq = observed as f64 / samples as f64;
            assert!((freq - p).abs() <= 5.0 * sd + 1e-3, "{freq} vs {p}");
        }
    }
}

#[test]
fn boundary_kernel_is_a_martingale_mean() {
    let flow = catalog::pascal_flow(30, 0.0).unwrap();
    let engine = LinkEngine::new(&flow).unwrap();
    let nu = catalog::bernoulli_system(30, 1.0 / 3.0).unwrap();
    let target = VertexId::new(1, 1);
    let mut sampler = PathSampler::new(8);
    let runs = 2000;
    let mut total = 0.0;
    for _ in 0..runs {
        let path = sampler.sample_up(&engine, &nu, 30).unwrap();
        total += engine.kernel(path.vertices[29], target).unwrap();
    }
    let mean = total / runs as f64;
    // kappa(z(30),(1,1)) = k/30 with k binomial(30, 1/3)
    let sd = (1.0 / 3.0 * 2.0 / 3.0 / 30.0 / runs as f64).sqrt();
    assert!((mean - 1.0 / 3.0).abs() < 5.0 * sd, "{mean}");
}

#[test]
fn pascal_ergodic_closed_form() {
    let flow = catalog::pascal_flow(64, q(0, 1)).unwrap();
    let engine = LinkEngine::new(&flow).unwrap();
    let nu = catalog::bernoulli_system(64, q(1, 2)).unwrap();
    let path: Vec<_> = (1..=64).map(|m| VertexId::new(m, m / 2)).collect();
    let table = ergodic_experiment(&engine, Some(&nu), &[VertexId::new(1, 1)], &path).unwrap();
    assert_eq!(table.levels, (1..=64).collect::<Vec<_>>());
    let deviation = table.deviation.as_ref().unwrap();
    for (i, m) in (1..=64i64).enumerate() {
        assert_eq!(table.values[i][0], q(m / 2, m));
        assert!(deviation[i] <= q(1, 2 * m));
    }
}

#[test]
fn young_plancherel_ergodic_rows() {
    let flow = catalog::young_flow(12, 0.0).unwrap();
    let engine = LinkEngine::new(&flow).unwrap();
    let nu = catalog::plancherel_system(12).unwrap();
    let g = engine.graph();
    let targets: Vec<_> = g.vertices(3).collect();
    let mut sampler = PathSampler::new(12);
    let path = sampler.sample_up(&engine, &nu, 12).unwrap().vertices;
    let table = ergodic_experiment(&engine, Some(&nu), &targets, &path).unwrap();
    assert_eq!(table.levels, (3..=12).collect::<Vec<_>>());
    for row in &table.values {
        let total: f64 = row.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(row.iter().all(|&v| v >= 0.0));
    }
    // the first row is the point mass at the path's level-3 vertex
    let first = &table.values[0];
    assert_eq!(first[path[2].index], 1.0);
    assert!(table.deviation.unwrap().iter().all(|d| *d <= 1.0));

    let no_ref = ergodic_experiment(&engine, None, &targets, &path).unwrap();
    assert!(no_ref.deviation.is_none());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn cylinder_measure_is_additive(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = Arc::new(random::graph(&mut rng, 4, 3, 2));
        let flow = random::boltzmann_flow::<BigRational, _>(&mut rng, g.clone(), q(1, 1));
        let engine = LinkEngine::new(&flow).unwrap();
        let nu = extend_down(&engine, &random::level_measure(&mut rng, &engine, 4)).unwrap();
        for n in 1..4 {
            for z in g.vertices(n) {
                for e in g.incoming(z) {
                    let below = g.source(e);
                    let c = CylinderSpec::new(&g, vec![z, below]).unwrap();
                    let p = cylinder_prob(&engine, &nu, &c).unwrap();
                    // splitting on the next vertex up
                    let split = g
                        .outgoing(z)
                        .map(|f| {
                            let c = CylinderSpec::new(&g, vec![g.target(f), z, below]).unwrap();
                            cylinder_prob(&engine, &nu, &c).unwrap()
                        })
                        .fold(q(0, 1), |a, b| a + b);
                    prop_assert_eq!(&split, &p);
                }
                // splitting a single-vertex cylinder on its predecessor
                let single = cylinder_prob(&engine, &nu, &CylinderSpec::new(&g, vec![z]).unwrap()).unwrap();
                prop_assert_eq!(&single, nu.get(z));
                let by_lower = g
                    .incoming(z)
                    .map(|e| {
                        let c = CylinderSpec::new(&g, vec![z, g.source(e)]).unwrap();
                        cylinder_prob(&engine, &nu, &c).unwrap()
                    })
                    .fold(q(0, 1), |a, b| a + b);
                prop_assert_eq!(by_lower, single);
            }
        }
    }
}
