//! Shared test machinery: an independent brute-force evaluator for
//! classical networks and a generator of random well-typed
//! classical-fragment terms.

use dcnet::matrix::ComplexMatrix;
use dcnet::network::{ClassicalNetwork, Endpoint, PortId, SpiderId};
use dcnet::object::{ClassicalObject, ObjectType};
use dcnet::term::Term;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

/// Brute-force tensor contraction of a network at dimension `dim`.
///
/// Uses only the local semantics (a dot is the all-legs-equal tensor,
/// an edge forces its two endpoints equal) and never reasons about
/// connectivity or rewrites, so it is an oracle independent of the
/// normaliser. Spider assignments are enumerated depth-first with
/// consistency pruning against already-assigned neighbours.
pub fn oracle_eval(net: &ClassicalNetwork, dim: usize) -> ComplexMatrix {
    let spiders: Vec<SpiderId> = net.spiders.iter().copied().collect();
    let index_of: BTreeMap<SpiderId, usize> =
        spiders.iter().enumerate().map(|(i, s)| (*s, i)).collect();

    // spider-spider equality constraints (self-loops hold trivially)
    let mut constraints: Vec<(usize, usize)> = Vec::new();
    // boundary ports tied to a spider, or tied to another port
    let mut port_spider: BTreeMap<PortId, usize> = BTreeMap::new();
    let mut port_pairs: Vec<(PortId, PortId)> = Vec::new();
    for edge in net.edges.values() {
        match (edge.a, edge.b) {
            (Endpoint::Spider(s1), Endpoint::Spider(s2)) => {
                if s1 != s2 {
                    constraints.push((index_of[&s1], index_of[&s2]));
                }
            }
            (Endpoint::Spider(s), Endpoint::Port(p)) | (Endpoint::Port(p), Endpoint::Spider(s)) => {
                port_spider.insert(p, index_of[&s]);
            }
            (Endpoint::Port(p), Endpoint::Port(q)) => {
                port_pairs.push((p, q));
            }
        }
    }

    let n_in = net.inputs.len();
    let n_out = net.outputs.len();
    let rows = dim.pow(n_out as u32);
    let cols = dim.pow(n_in as u32);
    let mut out = ComplexMatrix::zeros(rows, cols);

    let mut assign = vec![usize::MAX; spiders.len()];
    enumerate_spiders(
        net,
        dim,
        &constraints,
        &port_spider,
        &port_pairs,
        &mut assign,
        0,
        &mut out,
    );
    out
}

#[allow(clippy::too_many_arguments)]
fn enumerate_spiders(
    net: &ClassicalNetwork,
    dim: usize,
    constraints: &[(usize, usize)],
    port_spider: &BTreeMap<PortId, usize>,
    port_pairs: &[(PortId, PortId)],
    assign: &mut Vec<usize>,
    k: usize,
    out: &mut ComplexMatrix,
) {
    if k == assign.len() {
        accumulate_entries(net, dim, port_spider, port_pairs, assign, out);
        return;
    }
    'values: for v in 0..dim {
        assign[k] = v;
        for &(i, j) in constraints {
            if i.max(j) == k && assign[i.min(j)] != usize::MAX && assign[i.min(j)] != v {
                continue 'values;
            }
            // both sides assigned earlier stay consistent by induction
            if i.max(j) < k && assign[i] != assign[j] {
                continue 'values;
            }
        }
        enumerate_spiders(
            net,
            dim,
            constraints,
            port_spider,
            port_pairs,
            assign,
            k + 1,
            out,
        );
    }
    assign[k] = usize::MAX;
}

fn accumulate_entries(
    net: &ClassicalNetwork,
    dim: usize,
    port_spider: &BTreeMap<PortId, usize>,
    port_pairs: &[(PortId, PortId)],
    assign: &[usize],
    out: &mut ComplexMatrix,
) {
    // forced boundary values from spiders
    let mut forced: BTreeMap<PortId, usize> = BTreeMap::new();
    for (p, s) in port_spider {
        forced.insert(*p, assign[*s]);
    }
    // enumerate the port-port ties (each pair shares a free value when
    // neither side is forced, which cannot happen here: a port lies on
    // exactly one edge, so a tied port is never also spider-forced)
    let mut spread: Vec<BTreeMap<PortId, usize>> = vec![forced];
    for (p, q) in port_pairs {
        let mut next = Vec::new();
        for partial in &spread {
            for v in 0..dim {
                let mut grown = partial.clone();
                grown.insert(*p, v);
                grown.insert(*q, v);
                next.push(grown);
            }
        }
        spread = next;
    }
    for values in &spread {
        let row = net
            .outputs
            .iter()
            .fold(0usize, |acc, p| acc * dim + values[p]);
        let col = net
            .inputs
            .iter()
            .fold(0usize, |acc, p| acc * dim + values[p]);
        let v = out.get(row, col) + Complex64::new(1.0, 0.0);
        out.set(row, col, v);
    }
}

/// Random well-typed classical-fragment term with `wires` free inputs,
/// built layer by layer. Wire growth is damped so evaluation stays
/// cheap.
pub fn random_classical_term(
    rng: &mut ChaCha8Rng,
    x: &ClassicalObject,
    wires: usize,
    depth: usize,
) -> Term {
    let xt = ObjectType::classical(x);
    let mut term = Term::Identity(ObjectType::power(x.factor(), wires));
    let mut width = wires;
    for _ in 0..depth {
        let mut parts: Vec<Term> = Vec::new();
        let mut consumed = 0;
        let mut new_width = 0;
        while consumed < width {
            let remaining = width - consumed;
            // occasionally insert a generator from the unit
            if new_width + remaining < 7 && rng.gen_bool(0.12) {
                if rng.gen_bool(0.5) {
                    parts.push(Term::cup(x.factor()));
                    new_width += 2;
                } else {
                    parts.push(Term::dagger(Term::epsilon(x)));
                    new_width += 1;
                }
            }
            let two_wire_ok = remaining >= 2;
            match rng.gen_range(0..6) {
                0 if new_width + remaining < 7 => {
                    parts.push(Term::delta(x));
                    consumed += 1;
                    new_width += 2;
                }
                1 => {
                    parts.push(Term::epsilon(x));
                    consumed += 1;
                }
                2 if two_wire_ok => {
                    parts.push(Term::cap(x.factor()));
                    consumed += 2;
                }
                3 if two_wire_ok => {
                    parts.push(Term::swap(xt.clone(), xt.clone()));
                    consumed += 2;
                    new_width += 2;
                }
                4 if two_wire_ok => {
                    parts.push(Term::dagger(Term::delta(x)));
                    consumed += 2;
                    new_width += 1;
                }
                _ => {
                    parts.push(Term::Identity(xt.clone()));
                    consumed += 1;
                    new_width += 1;
                }
            }
        }
        if parts.is_empty() {
            parts.push(Term::Identity(ObjectType::unit()));
        }
        let layer = Term::tensor_chain(parts);
        term = Term::compose(layer, term).expect("layers align by construction");
        width = new_width;
        if width == 0 {
            break;
        }
    }
    term
}

/// Total wire slots the readback of this network will route; keeps the
/// exponential-cost tests on small instances.
#[allow(dead_code)]
pub fn readback_slot_count(net: &ClassicalNetwork) -> usize {
    let spider_legs: usize = net.spiders.iter().map(|s| net.degree(*s)).sum();
    let cup_like = net
        .edges
        .values()
        .filter(|e| match (e.a, e.b) {
            (Endpoint::Port(p), Endpoint::Port(q)) => net.is_output(p) && net.is_output(q),
            _ => false,
        })
        .count();
    spider_legs + 2 * cup_like + net.inputs.len()
}
