//! Independent reference implementations used by the integration and
//! acceptance tests. Nothing here calls the algorithms it checks.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use starmotif::{AgentId, AnalysisGraph};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Zero-padded so that index order equals id order.
pub fn node_name(i: usize) -> String {
    format!("v{i:04}")
}

/// A small undirected test graph kept both as an edge list and as an
/// [`AnalysisGraph`] over all `n` nodes (isolated ones included).
#[derive(Debug, Clone)]
pub struct TestGraph {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
    pub graph: AnalysisGraph,
}

impl TestGraph {
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> Self {
        let graph = AnalysisGraph::from_edges(
            (0..n).map(|i| AgentId::new(node_name(i)).unwrap()),
            edges.iter().map(|&(a, b)| {
                (
                    AgentId::new(node_name(a)).unwrap(),
                    AgentId::new(node_name(b)).unwrap(),
                    1,
                )
            }),
        )
        .unwrap();
        TestGraph { n, edges, graph }
    }

    pub fn adjacency(&self) -> Vec<Vec<bool>> {
        let mut m = vec![vec![false; self.n]; self.n];
        for &(a, b) in &self.edges {
            m[a][b] = true;
            m[b][a] = true;
        }
        m
    }
}

pub fn erdos_renyi(rng: &mut ChaCha8Rng, n: usize, p: f64) -> TestGraph {
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.random_bool(p) {
                edges.push((a, b));
            }
        }
    }
    TestGraph::new(n, edges)
}

/// Random spanning tree plus G(n, p) extras: always connected.
pub fn connected_random(rng: &mut ChaCha8Rng, n: usize, p: f64) -> TestGraph {
    let mut set = BTreeSet::new();
    for v in 1..n {
        let u = rng.random_range(0..v);
        set.insert((u, v));
    }
    for a in 0..n {
        for b in a + 1..n {
            if rng.random_bool(p) {
                set.insert((a, b));
            }
        }
    }
    TestGraph::new(n, set.into_iter().collect())
}

pub fn random_tree(rng: &mut ChaCha8Rng, n: usize) -> TestGraph {
    TestGraph::new(n, (1..n).map(|v| (rng.random_range(0..v), v)).collect())
}

/// All-pairs hop distances by Floyd–Warshall (`usize::MAX` = unreachable).
pub fn all_pairs_hops(adj: &[Vec<bool>]) -> Vec<Vec<usize>> {
    let n = adj.len();
    let inf = usize::MAX / 4;
    let mut d = vec![vec![inf; n]; n];
    for i in 0..n {
        d[i][i] = 0;
        for j in 0..n {
            if adj[i][j] {
                d[i][j] = 1;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d
}

/// Betweenness by listing every shortest path explicitly.
///
/// For each unordered pair `{s, t}` every shortest path is walked by DFS and
/// each interior vertex gets `1 / (number of shortest s-t paths)`.
pub fn brute_force_betweenness(adj: &[Vec<bool>]) -> Vec<f64> {
    let n = adj.len();
    let d = all_pairs_hops(adj);
    let inf = usize::MAX / 4;
    let mut score = vec![0.0; n];
    for s in 0..n {
        for t in s + 1..n {
            if d[s][t] >= inf {
                continue;
            }
            let mut paths: Vec<Vec<usize>> = Vec::new();
            let mut stack = vec![s];
            walk(adj, &d, t, &mut stack, &mut paths);
            let per_path = 1.0 / paths.len() as f64;
            for path in &paths {
                for &v in &path[1..path.len() - 1] {
                    score[v] += per_path;
                }
            }
        }
    }
    score
}

fn walk(
    adj: &[Vec<bool>],
    d: &[Vec<usize>],
    t: usize,
    stack: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    let v = *stack.last().unwrap();
    if v == t {
        out.push(stack.clone());
        return;
    }
    for w in 0..adj.len() {
        if adj[v][w] && d[w][t] + 1 == d[v][t] {
            stack.push(w);
            walk(adj, d, t, stack, out);
            stack.pop();
        }
    }
}

/// Principal eigenvector of the largest connected component's adjacency
/// matrix (ties: component with the smallest vertex), sign-fixed positive,
/// zero elsewhere. Also returns the eigenvalue.
pub fn dense_principal_eigenvector(adj: &[Vec<bool>]) -> (Vec<f64>, f64) {
    let n = adj.len();
    let mut comp = vec![usize::MAX; n];
    let mut sizes = Vec::new();
    for r in 0..n {
        if comp[r] != usize::MAX {
            continue;
        }
        let id = sizes.len();
        let mut stack = vec![r];
        comp[r] = id;
        let mut size = 0;
        while let Some(v) = stack.pop() {
            size += 1;
            for w in 0..n {
                if adj[v][w] && comp[w] == usize::MAX {
                    comp[w] = id;
                    stack.push(w);
                }
            }
        }
        sizes.push(size);
    }
    let best = sizes.iter().max().copied().unwrap_or(0);
    let chosen = sizes.iter().position(|&s| s == best).unwrap();
    let members: Vec<usize> = (0..n).filter(|&v| comp[v] == chosen).collect();
    let m = members.len();
    let mut out = vec![0.0; n];
    if m < 2 {
        return (out, 0.0);
    }
    let a = DMatrix::from_fn(m, m, |i, j| {
        if adj[members[i]][members[j]] {
            1.0
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(a);
    let (k, lambda) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|x: &(usize, &f64), y| x.1.total_cmp(y.1))
        .map(|(k, l)| (k, *l))
        .unwrap();
    let col = eig.eigenvectors.column(k);
    let sign = if col.sum() < 0.0 { -1.0 } else { 1.0 };
    let norm = col.norm();
    for (i, &v) in members.iter().enumerate() {
        out[v] = sign * col[i] / norm;
    }
    (out, lambda)
}

/// Every ego whose full one-hop neighborhood satisfies the star definition
/// literally: ego degree `k >= k_min`, each alter with at most 2 links to
/// other alters and at most 3 edges inside the star.
pub fn brute_force_stars(adj: &[Vec<bool>], k_min: usize) -> BTreeSet<(usize, BTreeSet<usize>)> {
    let n = adj.len();
    let mut out = BTreeSet::new();
    for ego in 0..n {
        let alters: BTreeSet<usize> = (0..n).filter(|&v| adj[ego][v]).collect();
        let k = alters.len();
        if k < k_min {
            continue;
        }
        let members: BTreeSet<usize> = alters.iter().copied().chain([ego]).collect();
        let ego_degree_in_star = members.iter().filter(|&&v| adj[ego][v]).count();
        let ok = ego_degree_in_star == k
            && alters.iter().all(|&a| {
                let alter_links = alters.iter().filter(|&&b| adj[a][b]).count();
                let star_degree = members.iter().filter(|&&b| adj[a][b]).count();
                alter_links <= 2 && star_degree <= 3
            });
        if ok {
            out.insert((ego, alters));
        }
    }
    out
}

/// `∫_a^b f` by tanh-sinh quadrature. `f` receives the abscissa computed
/// relative to the nearer endpoint, so endpoint singularities at `a = 0` are
/// resolved without cancellation.
pub fn tanh_sinh<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let h = 1.0 / 256.0;
    let half = 0.5 * (b - a);
    let mut sum = 0.0;
    let steps = (4.5 / h) as i64;
    for k in -steps..=steps {
        let t = k as f64 * h;
        let u = std::f64::consts::FRAC_PI_2 * t.sinh();
        let cu = u.cosh();
        let w = half * std::f64::consts::FRAC_PI_2 * t.cosh() / (cu * cu);
        if w < 1e-300 {
            continue;
        }
        // distance from the nearer endpoint: (b - a) / (1 + e^{2|u|})
        let delta = (b - a) / (1.0 + (2.0 * u.abs()).exp());
        let x = if t < 0.0 { a + delta } else { b - delta };
        if x <= a || x >= b {
            continue;
        }
        sum += w * f(x);
    }
    sum
}

/// Two-tailed Student t p-value by quadrature, free of gamma functions:
/// with `s = √df · cot φ`, `P(|T| > |t|) = ∫_0^{φ_t} sin^{df-1} φ dφ / ∫_0^{π/2} sin^{df-1} φ dφ`
/// where `φ_t = atan(√df / |t|)`.
pub fn t_two_tailed_by_quadrature(t: f64, df: f64) -> f64 {
    if t == 0.0 {
        return 1.0;
    }
    let alpha = df - 1.0;
    let f = |phi: f64| phi.sin().powf(alpha);
    let upper = (df.sqrt() / t.abs()).atan();
    tanh_sinh(f, 0.0, upper) / tanh_sinh(f, 0.0, std::f64::consts::FRAC_PI_2)
}

/// t statistic and df from raw samples using sums and sums of squares.
pub fn t_from_raw(a: &[f64], b: &[f64], welch: bool) -> (f64, f64) {
    let stats = |x: &[f64]| {
        let n = x.len() as f64;
        let s: f64 = x.iter().sum();
        let ss: f64 = x.iter().map(|v| v * v).sum();
        let mean = s / n;
        let var = (ss - n * mean * mean) / (n - 1.0);
        (n, mean, var)
    };
    let (na, ma, va) = stats(a);
    let (nb, mb, vb) = stats(b);
    if welch {
        let se2 = va / na + vb / nb;
        let df = se2 * se2 / ((va / na).powi(2) / (na - 1.0) + (vb / nb).powi(2) / (nb - 1.0));
        ((ma - mb) / se2.sqrt(), df)
    } else {
        let df = na + nb - 2.0;
        let sp2 = ((na - 1.0) * va + (nb - 1.0) * vb) / df;
        ((ma - mb) / (sp2 * (1.0 / na + 1.0 / nb)).sqrt(), df)
    }
}

/// Edges of a DOT document as unordered pairs of quoted node names.
pub fn parse_dot_edges(dot: &str) -> BTreeSet<(String, String)> {
    let mut out = BTreeSet::new();
    for line in dot.lines() {
        let Some((left, right)) = line.split_once(" -- ") else {
            continue;
        };
        let a = unquote(left.trim());
        let b = unquote(right.trim().split(' ').next().unwrap_or(""));
        let pair = if a <= b { (a, b) } else { (b, a) };
        out.insert(pair);
    }
    out
}

fn unquote(s: &str) -> String {
    s.trim_matches(|c| c == '"' || c == ';').to_string()
}

/// Per-node attribute lines `"id" [k=v, ...]` of a DOT document.
pub fn parse_dot_nodes(dot: &str) -> BTreeMap<String, String> {
    dot.lines()
        .filter(|l| !l.contains(" -- ") && l.trim_start().starts_with('"'))
        .filter_map(|l| {
            let (id, attrs) = l.trim().split_once(' ')?;
            Some((unquote(id), attrs.to_string()))
        })
        .collect()
}
