use super::{rel, IdentityRecord};
use crate::chains::{kernel_count, ChainQ};
use crate::error::{guard, Error, Result};
use crate::gauge::{CubicalComplex, PlaquetteDefinition};
use crate::graph::{EdgeSet, Graph, PlanarDualPairing, VertexSet};
use crate::measures::{
    double_current_exact, edge_measure, edge_measure_weight, exact_distribution, intersect_measure, max_rel_error, qflow_measure, spin_measure,
    traced_current_exact, union_measure, Distribution, EdgeModel, Space, SpinModel,
};
use std::collections::{HashMap, HashSet};

/// Largest edge count for the subset-of-subset enumerations (3^|E|).
const BRUTE_EDGE_GUARD: usize = 12;
/// Largest vertex count for the product of two spin tables (4^|V|).
const PRODUCT_VERTEX_GUARD: usize = 10;

fn describe(graph: &Graph) -> String {
    format!("V={} E={}", graph.vertex_count(), graph.edge_count())
}

fn listed(set: &VertexSet) -> String {
    format!("{:?}", set.iter().collect::<Vec<_>>())
}

fn law(graph: &Graph, model: EdgeModel) -> Result<Distribution> {
    exact_distribution(&edge_measure(graph, &model)?)
}

fn bernoulli(graph: &Graph, p: Vec<f64>) -> Result<Distribution> {
    law(graph, EdgeModel::Bernoulli { p })
}

fn edges_of(graph: &Graph, mask: usize) -> EdgeSet {
    EdgeSet::from_mask(graph.edge_count(), mask as u64)
}

fn brute_edges(graph: &Graph) -> Result<usize> {
    guard("brute-force edges", graph.edge_count() as u128, BRUTE_EDGE_GUARD as u128)?;
    Ok(graph.edge_count())
}

/// Multiset of ∂F over F ⊂ ω, keyed by the vertex bitmask of ∂F.
fn boundary_census(graph: &Graph, omega: usize) -> HashMap<u64, u64> {
    let flips: Vec<u64> = graph.edges().iter().map(|&(u, v)| (1u64 << u) ^ (1u64 << v)).collect();
    let mut census = HashMap::new();
    let mut f = omega;
    loop {
        let boundary = flips.iter().enumerate().filter(|(e, _)| f >> e & 1 == 1).fold(0, |b, (_, m)| b ^ m);
        *census.entry(boundary).or_insert(0) += 1;
        if f == 0 {
            break census;
        }
        f = (f - 1) & omega;
    }
}

fn vertex_bits(set: &VertexSet) -> u64 {
    set.iter().fold(0, |m, v| m | 1 << v)
}

fn pow2(exponent: i64) -> f64 {
    2f64.powi(exponent as i32)
}

/// |E_A(ω)| = 1[F_A] |E_∅(ω)| for every ω, both sides counted directly.
pub fn switching_principle(graph: &Graph, sources: &VertexSet) -> Result<IdentityRecord> {
    let len = brute_edges(graph)?;
    guard("vertices for bitmasks", graph.vertex_count() as u128, 64)?;
    let target = vertex_bits(sources);
    let mut worst: f64 = 0.0;
    for omega in 0..1usize << len {
        let census = boundary_census(graph, omega);
        let with_sources = census.get(&target).copied().unwrap_or(0) as f64;
        let even = census.get(&0).copied().unwrap_or(0) as f64;
        let predicted = if graph.in_event_fa(&edges_of(graph, omega), sources)? { even } else { 0.0 };
        worst = worst.max(rel(with_sources, predicted));
    }
    Ok(IdentityRecord::new("switching principle", format!("{}, A={}", describe(graph), listed(sources)), worst))
}

/// |E_∅(ω)| = 2^{|ω| + κ(ω) − |V|}.
pub fn even_count(graph: &Graph) -> Result<IdentityRecord> {
    let len = brute_edges(graph)?;
    guard("vertices for bitmasks", graph.vertex_count() as u128, 64)?;
    let mut worst: f64 = 0.0;
    for omega in 0..1usize << len {
        let counted = boundary_census(graph, omega).get(&0).copied().unwrap_or(0) as f64;
        let set = edges_of(graph, omega);
        let exponent = set.count() as i64 + graph.kappa(&set) as i64 - graph.vertex_count() as i64;
        worst = worst.max(rel(counted, pow2(exponent)));
    }
    Ok(IdentityRecord::new("even-count", describe(graph), worst))
}

/// |ker ∂^ω| = q^{|ω| + κ(ω) − |V|}, counting divergence-free chains
/// supported in ω over every ω.
pub fn kernel_count_identity(graph: &Graph, q: u32) -> Result<IdentityRecord> {
    let len = brute_edges(graph)?;
    let space = Space::Chains { cells: len, q };
    let size = space.guarded_size(crate::error::ENUMERATION_GUARD)?;
    let mut by_support = vec![0f64; 1 << len];
    for i in 0..size {
        let eta = ChainQ::from_index(q, len, i);
        if crate::chains::is_divergence_free(graph, &eta) {
            by_support[eta.support().to_mask() as usize] += 1.0;
        }
    }
    // sum over subsets
    for e in 0..len {
        for m in 0..1usize << len {
            if m >> e & 1 == 1 {
                by_support[m] += by_support[m ^ 1 << e];
            }
        }
    }
    let mut worst: f64 = 0.0;
    for (omega, &counted) in by_support.iter().enumerate() {
        let set = edges_of(graph, omega);
        let exponent = set.count() as i64 + graph.kappa(&set) as i64 - graph.vertex_count() as i64;
        let formula = (q as f64).powi(exponent as i32);
        worst = worst.max(rel(counted, formula)).max(rel(counted, kernel_count(graph, &set, q) as f64));
    }
    Ok(IdentityRecord::new("kernel count", format!("{}, q={q}", describe(graph)), worst))
}

/// ℓ^A_t ∪ ℙ_t = φ_{p,2}[· | F_A] with p = 2t/(1+t).
pub fn random_cluster_identity(graph: &Graph, sources: &VertexSet) -> Result<IdentityRecord> {
    brute_edges(graph)?;
    let t = graph.t_values();
    let lhs = union_measure(&law(graph, EdgeModel::Loop { t: t.clone(), sources: sources.clone() })?, &bernoulli(graph, t)?)?;
    let rc = law(graph, EdgeModel::RandomCluster { p: graph.p_values(), q: 2.0 })?;
    let fa: Vec<bool> = (0..lhs.probs.len()).map(|m| graph.in_event_fa(&edges_of(graph, m), sources)).collect::<Result<_>>()?;
    let rhs = rc.conditioned(|m| fa[m])?;
    Ok(IdentityRecord::new("random-cluster identity", format!("{}, A={}", describe(graph), listed(sources)), max_rel_error(&lhs, &rhs)?))
}

/// Traced current with sources A equals ℓ^A_t ∪ ℙ_{1−sech J}.
pub fn single_current(graph: &Graph, sources: &VertexSet) -> Result<IdentityRecord> {
    let j = graph.j_values();
    let lhs = traced_current_exact(graph, sources, &j)?;
    let sprinkle: Vec<f64> = j.iter().map(|j| 1.0 - 1.0 / j.cosh()).collect();
    let rhs = union_measure(&law(graph, EdgeModel::Loop { t: graph.t_values(), sources: sources.clone() })?, &bernoulli(graph, sprinkle)?)?;
    Ok(IdentityRecord::new("single-current identity", format!("{}, A={}", describe(graph), listed(sources)), max_rel_error(&lhs, &rhs)?))
}

fn double_trace(graph: &Graph, a: &VertexSet, b: &VertexSet) -> Result<Distribution> {
    let j = graph.j_values();
    union_measure(&traced_current_exact(graph, a, &j)?, &traced_current_exact(graph, b, &j)?)
}

fn doubled(graph: &Graph) -> Vec<f64> {
    graph.j_values().iter().map(|j| 2.0 * j).collect()
}

/// Trace of two independent currents equals ℓ^A ∪ ℓ^B ∪ ℙ_{t²}, and is
/// proportional to 1_{F_A} 2^κ times the traced current with sources A△B at
/// doubled coupling.
pub fn double_current(graph: &Graph, a: &VertexSet, b: &VertexSet) -> Result<IdentityRecord> {
    let lhs = double_trace(graph, a, b)?;
    let factorized = double_current_exact(graph, a, b, &graph.t_values())?;
    let at_double = traced_current_exact(graph, &a.symmetric_difference(b), &doubled(graph))?;
    let mut weights = Vec::with_capacity(at_double.probs.len());
    for (m, &w) in at_double.probs.iter().enumerate() {
        let set = edges_of(graph, m);
        weights.push(if graph.in_event_fa(&set, a)? { w * pow2(graph.kappa(&set) as i64) } else { 0.0 });
    }
    let reweighted = Distribution::from_weights(lhs.space, weights)?;
    let worst = max_rel_error(&lhs, &factorized)?.max(max_rel_error(&lhs, &reweighted)?);
    Ok(IdentityRecord::new("double-current factorization", format!("{}, A={}, B={}", describe(graph), listed(a), listed(b)), worst))
}

/// Double current ∝ 1_{F_A} |E_∅(ω)| (ℓ^{A△B}_t ∪ ℙ_{t²}).
pub fn lis_formula(graph: &Graph, a: &VertexSet, b: &VertexSet) -> Result<IdentityRecord> {
    let lhs = double_trace(graph, a, b)?;
    let t = graph.t_values();
    let t2 = t.iter().map(|t| t * t).collect();
    let base = union_measure(&law(graph, EdgeModel::Loop { t, sources: a.symmetric_difference(b) })?, &bernoulli(graph, t2)?)?;
    let mut weights = Vec::with_capacity(base.probs.len());
    for (m, &w) in base.probs.iter().enumerate() {
        let set = edges_of(graph, m);
        weights.push(if graph.in_event_fa(&set, a)? { w * pow2(graph.cyclomatic_number(&set) as i64) } else { 0.0 });
    }
    let rhs = Distribution::from_weights(base.space, weights)?;
    Ok(IdentityRecord::new("Lis's formula", format!("{}, A={}, B={}", describe(graph), listed(a), listed(b)), max_rel_error(&lhs, &rhs)?))
}

fn doubling_tilt(d: &Distribution) -> Result<Distribution> {
    d.tilted(|m| pow2(m.count_ones() as i64))
}

/// 2^{|ω|}(ℓ^A_x ∪ ℙ_p) ∝ ℓ^A_{2x/(1+p)} ∪ ℙ_{2p/(1+p)}, and
/// 2^{|ω|}(ℓ^A_t ∪ ℙ_{t²}) ∝ traced current at 2J.
pub fn reweighting(graph: &Graph, sources: &VertexSet, x: &[f64], p: &[f64]) -> Result<IdentityRecord> {
    brute_edges(graph)?;
    if x.len() != graph.edge_count() || p.len() != graph.edge_count() {
        return Err(Error::InvalidParameter("one x and one p per edge".into()));
    }
    let loop_law = |w: Vec<f64>| law(graph, EdgeModel::Loop { t: w, sources: sources.clone() });
    let lhs = doubling_tilt(&union_measure(&loop_law(x.to_vec())?, &bernoulli(graph, p.to_vec())?)?)?;
    let x2 = x.iter().zip(p).map(|(x, p)| 2.0 * x / (1.0 + p)).collect();
    let p2 = p.iter().map(|p| 2.0 * p / (1.0 + p)).collect();
    let rhs = union_measure(&loop_law(x2)?, &bernoulli(graph, p2)?)?;
    let first = max_rel_error(&lhs, &rhs)?;
    let t = graph.t_values();
    let t2 = t.iter().map(|t| t * t).collect();
    let lhs = doubling_tilt(&union_measure(&loop_law(t)?, &bernoulli(graph, t2)?)?)?;
    let rhs = traced_current_exact(graph, sources, &doubled(graph))?;
    let second = max_rel_error(&lhs, &rhs)?;
    Ok(IdentityRecord::new("reweighting", format!("{}, A={}", describe(graph), listed(sources)), first.max(second)))
}

/// The XOR of two independent Ising samples has weight Z_{S(σ),2J}.
pub fn xor_partition(graph: &Graph) -> Result<IdentityRecord> {
    guard("vertices for the product table", graph.vertex_count() as u128, PRODUCT_VERTEX_GUARD as u128)?;
    let j = graph.j_values();
    let ising = exact_distribution(&spin_measure(graph, &SpinModel::Ising { j: j.clone() })?)?;
    let mut probs = vec![0.0; ising.probs.len()];
    for (a, pa) in ising.support() {
        for (b, pb) in ising.support() {
            probs[a ^ b] += pa * pb;
        }
    }
    let product = Distribution { space: ising.space, probs };
    let xor = exact_distribution(&spin_measure(graph, &SpinModel::Xor { j })?)?;
    Ok(IdentityRecord::new("XOR partition function", describe(graph), max_rel_error(&product, &xor)?))
}

fn describe_complex(complex: &CubicalComplex) -> String {
    format!("cells {:?}", (0..=complex.top_dim()).map(|k| complex.cell_count(k)).collect::<Vec<_>>())
}

fn k_cell_guard(complex: &CubicalComplex, k: usize) -> Result<usize> {
    let n = complex.cell_count(k);
    guard("k-cells for subcomplex enumeration", n as u128, BRUTE_EDGE_GUARD as u128)?;
    Ok(n)
}

/// |C_{k−1}| = |ker d_k^ω| · |Im ∂_k^ω| for every set ω of k-cells.
pub fn rank_nullity(complex: &CubicalComplex, k: usize, q: u32) -> Result<IdentityRecord> {
    let n = k_cell_guard(complex, k)?;
    let total = (q as f64).powi(complex.cell_count(k - 1) as i32);
    let mut worst: f64 = 0.0;
    for m in 0..1usize << n {
        let omega = EdgeSet::from_mask(n, m as u64);
        let product = complex.coboundary_kernel_size(k, q, &omega)? as f64 * complex.boundary_image_size(k, q, &omega)? as f64;
        worst = worst.max(rel(total, product));
    }
    Ok(IdentityRecord::new("rank-nullity", format!("{}, k={k}, q={q}", describe_complex(complex)), worst))
}

/// Homological and cohomological plaquette random-cluster weights give the
/// same normalized law.
pub fn plaquette_equivalence(complex: &CubicalComplex, k: usize, q: u32, p: f64) -> Result<IdentityRecord> {
    let n = k_cell_guard(complex, k)?;
    let ps = vec![p; n];
    let table = |definition| -> Result<Distribution> {
        let w = (0..1usize << n)
            .map(|m| {
                let sub = complex.k_spanning(k, &EdgeSet::from_mask(n, m as u64))?;
                complex.plaquette_rc_weight(k, q, &ps, &sub, definition)
            })
            .collect::<Result<Vec<f64>>>()?;
        Distribution::from_weights(Space::Edges { edges: n }, w)
    };
    let worst = max_rel_error(&table(PlaquetteDefinition::Homological)?, &table(PlaquetteDefinition::Cohomological)?)?;
    Ok(IdentityRecord::new("plaquette definition equivalence", format!("{}, k={k}, q={q}, p={p}", describe_complex(complex)), worst))
}

/// Domain walls of the lattice gauge Potts model are q-flows on the image of
/// the boundary map with weight x = e^{−2J}. When the walls are 1-chains and
/// the image fills the kernel (as on a box) the law also equals the q-flow
/// measure of the 1-skeleton.
pub fn domain_wall_pushforward(complex: &CubicalComplex, k: usize, q: u32, j: f64) -> Result<IdentityRecord> {
    if !complex.has_dual_pairing() {
        return Err(Error::MissingDualPairing);
    }
    let d = complex.ambient_dim();
    if k == 0 || k > d || !(j > 0.0 && j.is_finite()) {
        return Err(Error::InvalidParameter(format!("need 1 <= k <= {d} and J > 0")));
    }
    let (spin_dim, wall_dim) = (d - k + 1, d - k);
    let (ns, nw) = (complex.cell_count(spin_dim), complex.cell_count(wall_dim));
    let spin_space = Space::Chains { cells: ns, q };
    let wall_space = Space::Chains { cells: nw, q };
    let spins = spin_space.guarded_size(crate::error::ENUMERATION_GUARD)?;
    wall_space.guarded_size(crate::error::ENUMERATION_GUARD)?;
    let mut walls = Vec::with_capacity(spins);
    let mut weights = Vec::with_capacity(spins);
    for s in 0..spins {
        let wall = complex.domain_wall_map(k, &ChainQ::from_index(q, ns, s))?;
        let agreeing = wall.values().iter().filter(|&&v| v == 0).count();
        weights.push((2.0 * j * agreeing as f64).exp());
        walls.push(wall.index());
    }
    let pushed = Distribution::from_weights(spin_space, weights)?.pushforward(wall_space, |s| walls[s])?;
    let image: HashSet<usize> = walls.iter().copied().collect();
    let x = (-2.0 * j).exp();
    let flow_weight = |w: usize| x.powi(ChainQ::from_index(q, nw, w).support().count() as i32);
    let size = wall_space.guarded_size(crate::error::ENUMERATION_GUARD)?;
    let predicted = Distribution::from_weights(wall_space, (0..size).map(|w| if image.contains(&w) { flow_weight(w) } else { 0.0 }).collect())?;
    let mut worst = max_rel_error(&pushed, &predicted)?;
    if wall_dim == 1 {
        let skeleton = complex.to_graph()?;
        let flows = exact_distribution(&qflow_measure(&skeleton, q, &vec![x; nw])?)?;
        if flows.support().count() == image.len() {
            worst = worst.max(max_rel_error(&pushed, &flows)?);
        }
    }
    Ok(IdentityRecord::new("domain-wall pushforward", format!("{}, k={k}, q={q}, J={j}", describe_complex(complex)), worst))
}

/// For ω ~ ℓ_x ∩ ℙ_{1−1/x} with x > 1, the dual edges {e* : e ∈ ω} follow
/// the q = 2 random-cluster measure on the dual at p = 1 − 1/x, conditioned
/// on being bipartite.
pub fn antiferro_dual(graph: &Graph, pairing: &PlanarDualPairing, x: &[f64]) -> Result<IdentityRecord> {
    let len = brute_edges(graph)?;
    if x.len() != len || x.iter().any(|&x| !(x > 1.0 && x.is_finite())) {
        return Err(Error::InvalidParameter("one loop weight above 1 per edge".into()));
    }
    let dual = pairing.dual();
    if dual.edge_count() != len {
        return Err(Error::SpaceMismatch);
    }
    let keep: Vec<f64> = x.iter().map(|x| 1.0 - 1.0 / x).collect();
    let primal = intersect_measure(&law(graph, EdgeModel::Loop { t: x.to_vec(), sources: graph.no_vertices() })?, &bernoulli(graph, keep.clone())?)?;
    let to_dual = |m: usize| (0..len).filter(|&e| m >> e & 1 == 1).fold(0usize, |acc, e| acc | 1 << pairing.dual_edge(e));
    let pushed = primal.pushforward(Space::Edges { edges: len }, to_dual)?;
    let mut dual_p = vec![0.0; len];
    for (e, &p) in keep.iter().enumerate() {
        dual_p[pairing.dual_edge(e)] = p;
    }
    let rc = law(dual, EdgeModel::RandomCluster { p: dual_p, q: 2.0 })?;
    let predicted = rc.conditioned(|m| dual.is_bipartite(&edges_of(dual, m)))?;
    Ok(IdentityRecord::new("antiferro dual", format!("{}, dual V={}", describe(graph), dual.vertex_count()), max_rel_error(&pushed, &predicted)?))
}

/// Edge sets of the loops of an even ω on a graph of maximum degree 3.
fn loops_of(graph: &Graph, omega: usize) -> Vec<usize> {
    let set = edges_of(graph, omega);
    let (labels, _) = graph.cluster_labels(&set);
    let mut by_label: HashMap<usize, usize> = HashMap::new();
    for e in set.iter() {
        *by_label.entry(labels[graph.endpoints(e).0]).or_insert(0) |= 1 << e;
    }
    let mut loops: Vec<usize> = by_label.into_values().collect();
    loops.sort_unstable();
    loops
}

/// Colouring each loop of a loop O(n) sample red with probability m/n:
/// the ω-marginal is loop O(n), the red marginal is ∝ ℓ_m[η] Z_{E∖η, n−m},
/// and given the red loops η the rest is loop O(n−m) on E∖η.
pub fn loop_on_split(graph: &Graph, n: f64, m: f64, x: &[f64]) -> Result<IdentityRecord> {
    let len = brute_edges(graph)?;
    if !(n > 0.0 && (0.0..=n).contains(&m)) {
        return Err(Error::InvalidParameter(format!("need 0 <= m <= n and n > 0, got n={n}, m={m}")));
    }
    let full_model = EdgeModel::LoopOn { x: x.to_vec(), n };
    let omega_law = law(graph, full_model)?;
    let space = Space::Edges { edges: len };
    let mut joint: Vec<(usize, usize, f64)> = Vec::new();
    for (omega, _) in omega_law.support() {
        let loops = loops_of(graph, omega);
        let base: f64 = (0..len).filter(|&e| omega >> e & 1 == 1).map(|e| x[e]).product();
        for pick in 0usize..1 << loops.len() {
            let red = loops.iter().enumerate().filter(|(i, _)| pick >> i & 1 == 1).fold(0, |acc, (_, l)| acc | l);
            let reds = pick.count_ones() as i32;
            let w = base * m.powi(reds) * (n - m).powi(loops.len() as i32 - reds);
            if w > 0.0 {
                joint.push((omega, red, w));
            }
        }
    }
    let mut omega_marg = vec![0.0; 1 << len];
    let mut red_marg = vec![0.0; 1 << len];
    for &(o, r, w) in &joint {
        omega_marg[o] += w;
        red_marg[r] += w;
    }
    let mut worst = max_rel_error(&Distribution::from_weights(space, omega_marg)?, &omega_law)?;
    let red_law = Distribution::from_weights(space, red_marg)?;
    let mut predicted = vec![0.0; 1 << len];
    for (eta, _) in red_law.support() {
        let red = edges_of(graph, eta);
        let (rest, kept) = graph.restrict(&red.complement());
        let rest_x: Vec<f64> = kept.iter().map(|&e| x[e]).collect();
        let rest_law = law(&rest, EdgeModel::LoopOn { x: rest_x, n: n - m })?;
        let z_rest: f64 = edge_measure(&rest, &EdgeModel::LoopOn { x: kept.iter().map(|&e| x[e]).collect(), n: n - m })?.weights.iter().sum();
        predicted[eta] = edge_measure_weight(graph, &EdgeModel::LoopOn { x: x.to_vec(), n: m }, &red)? * z_rest;
        let mut lifted = vec![0.0; 1 << len];
        for (r, pr) in rest_law.support() {
            let extra = kept.iter().enumerate().filter(|(i, _)| r >> i & 1 == 1).fold(0usize, |acc, (_, &e)| acc | 1 << e);
            lifted[eta | extra] += pr;
        }
        let given: Vec<f64> = {
            let mut g = vec![0.0; 1 << len];
            for &(o, r, w) in &joint {
                if r == eta {
                    g[o] += w;
                }
            }
            g
        };
        worst = worst.max(max_rel_error(&Distribution::from_weights(space, given)?, &Distribution::from_weights(space, lifted)?)?);
    }
    worst = worst.max(max_rel_error(&red_law, &Distribution::from_weights(space, predicted)?)?);
    Ok(IdentityRecord::new("loop O(n) split", format!("{}, n={n}, m={m}", describe(graph)), worst))
}
