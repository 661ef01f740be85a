use ftspan::construct::{compute_sets, default_gamma, Params};
use ftspan::gen::{self, Clustered};
use ftspan::pipeline::{build, BuildConfig, Mode};
use ftspan::verify::mutate::{apply, Mutation};
use ftspan::verify::stretch::{all_fault_sets, fault_suite, within, FaultStrategy, Hints};
use ftspan::verify::structural_audit;
use ftspan::{FtSpanner, Metric, NetTree};

fn clustered(n: usize, seed: u64) -> Metric {
    Clustered {
        gap: 10.0,
        ..Clustered::default()
    }
    .generate(n, seed)
    .normalize()
}

/// All-pairs distances of `sp` minus `faults`, by Floyd-Warshall.
fn floyd(sp: &FtSpanner, faults: &[usize]) -> Vec<Vec<f64>> {
    let n = sp.n();
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (v, row) in d.iter_mut().enumerate() {
        row[v] = 0.0;
    }
    for e in sp.edges() {
        if faults.contains(&e.u) || faults.contains(&e.v) {
            continue;
        }
        d[e.u][e.v] = d[e.u][e.v].min(e.w);
        d[e.v][e.u] = d[e.u][e.v];
    }
    for via in 0..n {
        for a in 0..n {
            for b in 0..n {
                let c = d[a][via] + d[via][b];
                if c < d[a][b] {
                    d[a][b] = c;
                }
            }
        }
    }
    d
}

#[test]
fn audit_is_clean_across_inputs() {
    let mut cases: Vec<(String, Metric)> = Vec::new();
    for seed in 0..3 {
        cases.push((format!("uniform/{seed}"), gen::uniform_plane(150, seed).normalize()));
        cases.push((format!("noisy/{seed}"), gen::noisy_matrix(90, seed).normalize()));
        cases.push((format!("clustered/{seed}"), clustered(300, seed)));
    }
    for (name, m) in &cases {
        for k in [0, 1, 2, 5] {
            let out = build(m, &BuildConfig::new(0.5, k)).unwrap();
            let findings = structural_audit(&out.tree, m, &out.table);
            assert!(findings.is_empty(), "{name}, k = {k}: {}", findings[0]);
        }
    }
}

#[test]
fn every_mutation_is_caught() {
    let candidates: Vec<(Metric, usize)> = vec![
        (clustered(300, 1), 1),
        (clustered(300, 2), 2),
        (gen::uniform_plane(150, 3).normalize(), 1),
        (gen::line(200), 1),
    ];
    for mutation in Mutation::ALL {
        let mut applied = false;
        for (m, k) in &candidates {
            let out = build(m, &BuildConfig::new(0.5, *k)).unwrap();
            let mut table = out.table.clone();
            if !apply(mutation, &out.tree, m, &mut table) {
                continue;
            }
            applied = true;
            let findings = structural_audit(&out.tree, m, &table);
            assert!(!findings.is_empty(), "{mutation:?} went unnoticed");
            break;
        }
        assert!(applied, "{mutation:?} found no node to corrupt");
    }
}

#[test]
fn dirty_leaves_keep_their_level_zero_pairs() {
    let dense = Clustered {
        leaf_size: 8,
        fanout: 4,
        gap: 10.0,
    };
    let inputs = [gen::line(60), dense.generate(80, 1).normalize(), dense.generate(80, 2).normalize()];
    for (seed, m) in inputs.into_iter().enumerate() {
        let out = build(&m, &BuildConfig::new(0.5, 1).mode(Mode::Matching)).unwrap();
        let t = &out.tree;
        let mut dirty_pairs = 0;
        for &(a, b) in t.cross_edges(0) {
            if out.table.nodes[a].dirty || out.table.nodes[b].dirty {
                dirty_pairs += 1;
                assert!(out.spanner.contains(t.node(a).point, t.node(b).point));
            }
        }
        assert!(dirty_pairs > 0, "instance {seed} has no dirty leaf");
    }
}

#[test]
fn exhaustive_faults_against_floyd_warshall() {
    let (eps, k) = (0.5, 2);
    for (name, m) in [("uniform", gen::uniform_plane(30, 9).normalize()), ("clustered", clustered(30, 9))] {
        let out = build(&m, &BuildConfig::new(eps, k)).unwrap();
        let sets = all_fault_sets(m.len(), k);
        assert_eq!(sets.len(), 466);
        let mut worst: f64 = 1.0;
        for f in &sets {
            let d = floyd(&out.spanner, f);
            for p in 0..m.len() {
                for q in p + 1..m.len() {
                    if !f.contains(&p) && !f.contains(&q) {
                        worst = worst.max(d[p][q] / m.dist(p, q));
                    }
                }
            }
        }
        assert!(within(worst, eps), "{name}: worst stretch {worst}");
        let r = fault_suite(&out.spanner, &m, eps, k, &FaultStrategy::Exhaustive, &Hints::default()).unwrap();
        assert!(r.passed);
        assert_eq!(r.tested, 466);
        let reported = r.worst.map_or(1.0, |w| w.stretch);
        assert!((reported - worst).abs() <= 1e-9 * worst, "{name}: {reported} vs {worst}");
    }
}

#[test]
fn modes_trade_edges_not_tolerance() {
    let m = clustered(120, 4);
    let k = 2;
    let mut sizes = Vec::new();
    for mode in [Mode::CliqueOnly, Mode::Matching, Mode::Full] {
        let out = build(&m, &BuildConfig::new(0.5, k).mode(mode)).unwrap();
        let hints = Hints {
            surrogate_use: Some(out.surrogate_use()),
        };
        for strategy in [FaultStrategy::Targeted, FaultStrategy::Random { trials: 200, seed: 1 }] {
            let r = fault_suite(&out.spanner, &m, 0.5, k, &strategy, &hints).unwrap();
            assert!(r.passed, "{mode:?} {strategy:?}: {:?}", r.worst);
        }
        sizes.push(out.spanner.len());
    }
    assert!(sizes[1] <= sizes[0], "matching {} vs clique {}", sizes[1], sizes[0]);
    assert!(sizes[2] >= sizes[1]);
}

#[test]
fn dirty_sets_hold_k_plus_one_points() {
    let m = clustered(256, 5);
    for k in [1, 3, 6] {
        let mut t = NetTree::build(&m).unwrap();
        t.add_cross_edges(&m, default_gamma(0.5));
        let params = Params::new(k, 0.5, default_gamma(0.5), t.xi());
        let table = compute_sets(&t, &m, &params).unwrap();
        let mut dirty = 0;
        for x in 0..t.len() {
            if table.nodes[x].dirty {
                dirty += 1;
                assert_eq!(table.surrogates(x).len(), k + 1);
            }
        }
        assert!(dirty > 0, "k = {k}");
    }
}
