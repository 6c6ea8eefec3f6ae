//! Open spider-graph representation of classical networks: the
//! copying/deleting fragment on a single classical object, as a
//! multigraph of dots, boundary ports and wires.
//!
//! Parallel edges and self-loops are kept explicit; the rewrite rules
//! in [`crate::normalizer`] consume them one at a time. Legs are
//! undirected; direction is recorded only at the boundary.

use crate::object::{ClassicalObject, ObjectType};
use crate::term::{dagger_pushdown, delta_n, Term};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetError {
    #[error("term leaves the classical fragment: {0}")]
    NotClassicalFragment(String),
    #[error("term mixes distinct classical objects")]
    MixedClassicalObjects,
    #[error("rewrite not applicable: {0}")]
    NotApplicable(String),
    #[error("malformed network: {0}")]
    Malformed(String),
}

pub type NetResult<T> = Result<T, NetError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SpiderId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PortId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EdgeId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Endpoint {
    Spider(SpiderId),
    Port(PortId),
}

/// Wires are plain by default; edges introduced by a cup or cap
/// generator keep their kind until Step 1 of normalisation expands
/// them into dots.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EdgeKind {
    Wire,
    Cup,
    Cap,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub a: Endpoint,
    pub b: Endpoint,
    pub kind: EdgeKind,
}

impl Edge {
    pub fn other(&self, e: Endpoint) -> Endpoint {
        if self.a == e {
            self.b
        } else {
            self.a
        }
    }

    pub fn touches(&self, e: Endpoint) -> bool {
        self.a == e || self.b == e
    }

    pub fn is_self_loop(&self) -> bool {
        self.a == self.b
    }
}

/// Open spider graph on a single classical object.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalNetwork {
    pub obj: ClassicalObject,
    pub spiders: BTreeSet<SpiderId>,
    pub edges: BTreeMap<EdgeId, Edge>,
    pub inputs: Vec<PortId>,
    pub outputs: Vec<PortId>,
    next_spider: u32,
    next_port: u32,
    next_edge: u32,
}

impl ClassicalNetwork {
    pub fn new(obj: ClassicalObject) -> Self {
        ClassicalNetwork {
            obj,
            spiders: BTreeSet::new(),
            edges: BTreeMap::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            next_spider: 0,
            next_port: 0,
            next_edge: 0,
        }
    }

    pub fn fresh_spider(&mut self) -> SpiderId {
        let id = SpiderId(self.next_spider);
        self.next_spider += 1;
        self.spiders.insert(id);
        id
    }

    pub fn fresh_port(&mut self) -> PortId {
        let id = PortId(self.next_port);
        self.next_port += 1;
        id
    }

    pub fn add_edge(&mut self, a: Endpoint, b: Endpoint, kind: EdgeKind) -> EdgeId {
        let id = EdgeId(self.next_edge);
        self.next_edge += 1;
        self.edges.insert(id, Edge { a, b, kind });
        id
    }

    pub fn remove_edge(&mut self, id: EdgeId) -> Option<Edge> {
        self.edges.remove(&id)
    }

    /// Number of dots; the termination measure of the rewrite system.
    pub fn dot_count(&self) -> usize {
        self.spiders.len()
    }

    /// Leg count of a spider; a self-loop contributes two legs.
    pub fn degree(&self, s: SpiderId) -> usize {
        let e = Endpoint::Spider(s);
        self.edges
            .values()
            .map(|edge| (edge.a == e) as usize + (edge.b == e) as usize)
            .sum()
    }

    pub fn edges_at(&self, e: Endpoint) -> Vec<EdgeId> {
        self.edges
            .iter()
            .filter(|(_, edge)| edge.touches(e))
            .map(|(id, _)| *id)
            .collect()
    }

    /// The unique edge at a boundary port.
    pub fn port_edge(&self, p: PortId) -> NetResult<EdgeId> {
        let hits = self.edges_at(Endpoint::Port(p));
        match hits.as_slice() {
            [one] => Ok(*one),
            other => Err(NetError::Malformed(format!(
                "port {:?} lies on {} edges, expected exactly 1",
                p,
                other.len()
            ))),
        }
    }

    pub fn is_input(&self, p: PortId) -> bool {
        self.inputs.contains(&p)
    }

    pub fn is_output(&self, p: PortId) -> bool {
        self.outputs.contains(&p)
    }

    /// Structural invariants: every port on exactly one edge, all
    /// endpoints known, boundary lists disjoint and exhaustive.
    pub fn validate(&self) -> NetResult<()> {
        let mut ports: BTreeSet<PortId> = BTreeSet::new();
        for p in self.inputs.iter().chain(self.outputs.iter()) {
            if !ports.insert(*p) {
                return Err(NetError::Malformed(format!("port {p:?} listed twice")));
            }
        }
        for (id, edge) in &self.edges {
            for e in [edge.a, edge.b] {
                match e {
                    Endpoint::Spider(s) if !self.spiders.contains(&s) => {
                        return Err(NetError::Malformed(format!(
                            "edge {id:?} hits unknown {s:?}"
                        )));
                    }
                    Endpoint::Port(p) if !ports.contains(&p) => {
                        return Err(NetError::Malformed(format!(
                            "edge {id:?} hits unknown {p:?}"
                        )));
                    }
                    _ => {}
                }
            }
        }
        for p in &ports {
            self.port_edge(*p)?;
        }
        Ok(())
    }

    /// Connected components under the path relation on dots, wires and
    /// ports, ordered by least port id, then least spider id; isolated
    /// dots form their own components.
    pub fn connected_components(&self) -> Vec<Component> {
        let mut parent: BTreeMap<Endpoint, Endpoint> = BTreeMap::new();
        let init = |parent: &mut BTreeMap<Endpoint, Endpoint>, e: Endpoint| {
            parent.entry(e).or_insert(e);
        };
        for s in &self.spiders {
            init(&mut parent, Endpoint::Spider(*s));
        }
        for p in self.inputs.iter().chain(self.outputs.iter()) {
            init(&mut parent, Endpoint::Port(*p));
        }
        fn find(parent: &mut BTreeMap<Endpoint, Endpoint>, e: Endpoint) -> Endpoint {
            let mut root = e;
            while parent[&root] != root {
                root = parent[&root];
            }
            let mut cur = e;
            while parent[&cur] != root {
                let next = parent[&cur];
                parent.insert(cur, root);
                cur = next;
            }
            root
        }
        for edge in self.edges.values() {
            let ra = find(&mut parent, edge.a);
            let rb = find(&mut parent, edge.b);
            if ra != rb {
                parent.insert(ra, rb);
            }
        }
        let keys: Vec<Endpoint> = parent.keys().copied().collect();
        let mut groups: BTreeMap<Endpoint, Component> = BTreeMap::new();
        for e in keys {
            let root = find(&mut parent, e);
            let comp = groups.entry(root).or_default();
            match e {
                Endpoint::Spider(s) => comp.spiders.push(s),
                Endpoint::Port(p) => comp.ports.push(p),
            }
        }
        let mut comps: Vec<Component> = groups.into_values().collect();
        for c in comps.iter_mut() {
            c.spiders.sort();
            c.ports.sort();
        }
        comps.sort_by_key(|c| (c.ports.first().copied(), c.spiders.first().copied()));
        // Components with ports come before port-free scalar components.
        comps.sort_by_key(|c| c.ports.is_empty());
        comps
    }

    /// Graphviz rendering: dots as filled circles, boundary ports as
    /// labelled squares.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph classical_network {\n");
        for s in &self.spiders {
            out.push_str(&format!(
                "  s{} [shape=circle, style=filled, fillcolor=black, width=0.15, label=\"\"];\n",
                s.0
            ));
        }
        for (k, p) in self.inputs.iter().enumerate() {
            out.push_str(&format!("  p{} [shape=square, label=\"in{}\"];\n", p.0, k));
        }
        for (k, p) in self.outputs.iter().enumerate() {
            out.push_str(&format!("  p{} [shape=square, label=\"out{}\"];\n", p.0, k));
        }
        for edge in self.edges.values() {
            let node = |e: Endpoint| match e {
                Endpoint::Spider(s) => format!("s{}", s.0),
                Endpoint::Port(p) => format!("p{}", p.0),
            };
            let style = match edge.kind {
                EdgeKind::Wire => "",
                EdgeKind::Cup | EdgeKind::Cap => " [style=dashed]",
            };
            out.push_str(&format!(
                "  {} -- {}{};\n",
                node(edge.a),
                node(edge.b),
                style
            ));
        }
        out.push_str("}\n");
        out
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Component {
    pub spiders: Vec<SpiderId>,
    pub ports: Vec<PortId>,
}

/// Serialized shape of a network; `edges` flattened for JSON.
#[derive(Serialize, Deserialize)]
struct NetworkRepr {
    obj: ClassicalObject,
    spiders: Vec<u32>,
    edges: Vec<(u32, Edge)>,
    inputs: Vec<u32>,
    outputs: Vec<u32>,
}

impl Serialize for ClassicalNetwork {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        NetworkRepr {
            obj: self.obj.clone(),
            spiders: self.spiders.iter().map(|s| s.0).collect(),
            edges: self.edges.iter().map(|(id, e)| (id.0, *e)).collect(),
            inputs: self.inputs.iter().map(|p| p.0).collect(),
            outputs: self.outputs.iter().map(|p| p.0).collect(),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for ClassicalNetwork {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let repr = NetworkRepr::deserialize(de)?;
        let next_spider = repr.spiders.iter().max().map_or(0, |m| m + 1);
        let next_port = repr
            .inputs
            .iter()
            .chain(repr.outputs.iter())
            .max()
            .map_or(0, |m| m + 1);
        let next_edge = repr
            .edges
            .iter()
            .map(|(id, _)| *id)
            .max()
            .map_or(0, |m| m + 1);
        let net = ClassicalNetwork {
            obj: repr.obj,
            spiders: repr.spiders.into_iter().map(SpiderId).collect(),
            edges: repr
                .edges
                .into_iter()
                .map(|(id, e)| (EdgeId(id), e))
                .collect(),
            inputs: repr.inputs.into_iter().map(PortId).collect(),
            outputs: repr.outputs.into_iter().map(PortId).collect(),
            next_spider,
            next_port,
            next_edge,
        };
        net.validate().map_err(serde::de::Error::custom)?;
        Ok(net)
    }
}

/// Open fragment during translation: the graph under construction
/// plus its dangling boundary, as ports to be spliced or exported.
struct Fragment {
    inputs: Vec<PortId>,
    outputs: Vec<PortId>,
}

/// Translate a classical-fragment term into its spider graph. Cups and
/// caps pass through as marked edges; Step 1 of the normaliser expands
/// them.
pub fn to_network(term: &Term) -> NetResult<ClassicalNetwork> {
    let obj = classical_fragment_object(term)?;
    let pushed = dagger_pushdown(term);
    let mut net = ClassicalNetwork::new(obj);
    let frag = translate(&pushed, &mut net)?;
    net.inputs = frag.inputs;
    net.outputs = frag.outputs;
    net.validate()?;
    Ok(net)
}

/// The single classical object a fragment term lives on, with precise
/// errors for boxes, generic factors and mixed objects.
fn classical_fragment_object(term: &Term) -> NetResult<ClassicalObject> {
    fn note(x: ClassicalObject, found: &mut Option<ClassicalObject>) -> NetResult<()> {
        match found {
            Some(seen) if *seen != x => Err(NetError::MixedClassicalObjects),
            Some(_) => Ok(()),
            None => {
                *found = Some(x);
                Ok(())
            }
        }
    }
    fn note_object(o: &ObjectType, found: &mut Option<ClassicalObject>) -> NetResult<()> {
        for f in &o.factors {
            match f.as_classical() {
                Some(x) => note(x, found)?,
                None => {
                    return Err(NetError::NotClassicalFragment(format!(
                        "generic object {f}"
                    )))
                }
            }
        }
        Ok(())
    }
    fn walk(t: &Term, found: &mut Option<ClassicalObject>) -> NetResult<()> {
        match t {
            Term::Identity(o) => note_object(o, found),
            Term::Swap(a, b) => {
                note_object(a, found)?;
                note_object(b, found)
            }
            Term::Cup(f) | Term::Cap(f) => match f.as_classical() {
                Some(x) => note(x, found),
                None => Err(NetError::NotClassicalFragment(format!(
                    "cup/cap on generic {f}"
                ))),
            },
            Term::Delta(x) | Term::Epsilon(x) => note(x.clone(), found),
            Term::Box { name, .. } => Err(NetError::NotClassicalFragment(format!("box {name}"))),
            Term::Conjugate(_) => Err(NetError::NotClassicalFragment("conjugate marker".into())),
            Term::Dagger(inner) => walk(inner, found),
            Term::Compose(g, f) => {
                walk(f, found)?;
                walk(g, found)
            }
            Term::Tensor(l, r) => {
                walk(l, found)?;
                walk(r, found)
            }
        }
    }
    let mut found = None;
    walk(term, &mut found)?;
    found.ok_or_else(|| NetError::NotClassicalFragment("term contains no classical object".into()))
}

fn translate(term: &Term, net: &mut ClassicalNetwork) -> NetResult<Fragment> {
    match term {
        Term::Identity(o) => {
            let mut frag = Fragment {
                inputs: Vec::new(),
                outputs: Vec::new(),
            };
            for _ in 0..o.len() {
                let p_in = net.fresh_port();
                let p_out = net.fresh_port();
                net.add_edge(Endpoint::Port(p_in), Endpoint::Port(p_out), EdgeKind::Wire);
                frag.inputs.push(p_in);
                frag.outputs.push(p_out);
            }
            Ok(frag)
        }
        Term::Swap(a, b) => {
            let (na, nb) = (a.len(), b.len());
            let inputs: Vec<PortId> = (0..na + nb).map(|_| net.fresh_port()).collect();
            let mut outputs = vec![PortId(u32::MAX); na + nb];
            for (i, p_in) in inputs.iter().enumerate() {
                let p_out = net.fresh_port();
                net.add_edge(Endpoint::Port(*p_in), Endpoint::Port(p_out), EdgeKind::Wire);
                // first block lands after the second, second block in front
                let target = if i < na { nb + i } else { i - na };
                outputs[target] = p_out;
            }
            Ok(Fragment { inputs, outputs })
        }
        Term::Cup(_) => {
            let o0 = net.fresh_port();
            let o1 = net.fresh_port();
            net.add_edge(Endpoint::Port(o0), Endpoint::Port(o1), EdgeKind::Cup);
            Ok(Fragment {
                inputs: Vec::new(),
                outputs: vec![o0, o1],
            })
        }
        Term::Cap(_) => {
            let i0 = net.fresh_port();
            let i1 = net.fresh_port();
            net.add_edge(Endpoint::Port(i0), Endpoint::Port(i1), EdgeKind::Cap);
            Ok(Fragment {
                inputs: vec![i0, i1],
                outputs: Vec::new(),
            })
        }
        Term::Delta(_) => Ok(spider_fragment(net, 1, 2)),
        Term::Epsilon(_) => Ok(spider_fragment(net, 1, 0)),
        Term::Dagger(inner) => match inner.as_ref() {
            Term::Delta(_) => Ok(spider_fragment(net, 2, 1)),
            Term::Epsilon(_) => Ok(spider_fragment(net, 0, 1)),
            other => Err(NetError::NotClassicalFragment(format!(
                "dagger of non-generator {other} survived pushdown"
            ))),
        },
        Term::Compose(g, f) => {
            let frag_f = translate(f, net)?;
            let frag_g = translate(g, net)?;
            debug_assert_eq!(frag_f.outputs.len(), frag_g.inputs.len());
            for (out_p, in_p) in frag_f.outputs.iter().zip(frag_g.inputs.iter()) {
                splice(net, *out_p, *in_p)?;
            }
            Ok(Fragment {
                inputs: frag_f.inputs,
                outputs: frag_g.outputs,
            })
        }
        Term::Tensor(l, r) => {
            let mut frag_l = translate(l, net)?;
            let frag_r = translate(r, net)?;
            frag_l.inputs.extend(frag_r.inputs);
            frag_l.outputs.extend(frag_r.outputs);
            Ok(frag_l)
        }
        other => Err(NetError::NotClassicalFragment(other.to_string())),
    }
}

fn spider_fragment(net: &mut ClassicalNetwork, ins: usize, outs: usize) -> Fragment {
    let s = net.fresh_spider();
    let mut frag = Fragment {
        inputs: Vec::new(),
        outputs: Vec::new(),
    };
    for _ in 0..ins {
        let p = net.fresh_port();
        net.add_edge(Endpoint::Port(p), Endpoint::Spider(s), EdgeKind::Wire);
        frag.inputs.push(p);
    }
    for _ in 0..outs {
        let p = net.fresh_port();
        net.add_edge(Endpoint::Spider(s), Endpoint::Port(p), EdgeKind::Wire);
        frag.outputs.push(p);
    }
    frag
}

/// Join the wire ending at `out_p` with the wire starting at `in_p`,
/// removing both intermediate ports.
fn splice(net: &mut ClassicalNetwork, out_p: PortId, in_p: PortId) -> NetResult<()> {
    let e1 = net.port_edge(out_p)?;
    let e2 = net.port_edge(in_p)?;
    if e1 == e2 {
        // The wire already runs from out_p to in_p; closing it makes a
        // circle, which has no endpoints to live on. A closed loop of
        // classical wire carries the scalar tr(1) = dim, the same
        // value as a pair of joined counit dots, so materialise that.
        net.remove_edge(e1);
        let s1 = net.fresh_spider();
        let s2 = net.fresh_spider();
        net.add_edge(Endpoint::Spider(s1), Endpoint::Spider(s2), EdgeKind::Wire);
        return Ok(());
    }
    let edge1 = net.remove_edge(e1).expect("edge1 exists");
    let edge2 = net.remove_edge(e2).expect("edge2 exists");
    let a = edge1.other(Endpoint::Port(out_p));
    let b = edge2.other(Endpoint::Port(in_p));
    // Cup edges always reach the splice from the first factor, cap
    // edges from the second; a straightened cup-cap chain is a wire.
    let kind = match (edge1.kind, edge2.kind) {
        (EdgeKind::Wire, EdgeKind::Wire) => EdgeKind::Wire,
        (EdgeKind::Cup, EdgeKind::Wire) => EdgeKind::Cup,
        (EdgeKind::Wire, EdgeKind::Cap) => EdgeKind::Cap,
        (EdgeKind::Cup, EdgeKind::Cap) => EdgeKind::Wire,
        (k1, k2) => unreachable!("splice saw kinds {k1:?}/{k2:?}"),
    };
    net.add_edge(a, b, kind);
    Ok(())
}

/// Normal form: one `(m, n)` record per connected component, plus the
/// original boundary order needed to reassemble the permutation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalForm {
    pub components: Vec<NormalFormComponent>,
    pub inputs: Vec<PortId>,
    pub outputs: Vec<PortId>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalFormComponent {
    pub boundary_inputs: Vec<PortId>,
    pub boundary_outputs: Vec<PortId>,
    pub m: usize,
    pub n: usize,
    pub bare_wire: bool,
}

impl NormalForm {
    pub fn validate(&self) -> NetResult<()> {
        for c in &self.components {
            if c.m != c.boundary_inputs.len() || c.n != c.boundary_outputs.len() {
                return Err(NetError::Malformed(
                    "component counts disagree with lists".into(),
                ));
            }
            if c.bare_wire && !(c.m == 1 && c.n == 1) {
                return Err(NetError::Malformed("bare wire must be (1,1)".into()));
            }
        }
        Ok(())
    }
}

/// The connected `(m, n)` dot as a term: `δ_n ∘ δ_m†`, with the
/// deleting map standing in on an empty side.
pub fn spider_term(x: &ClassicalObject, m: usize, n: usize) -> Term {
    let top = if n == 0 {
        Term::epsilon(x)
    } else {
        delta_n(x, n)
    };
    let bottom = if m == 0 {
        Term::dagger(Term::epsilon(x))
    } else {
        Term::dagger(delta_n(x, m))
    };
    match (m, n) {
        (1, 1) => Term::Identity(ObjectType::classical(x)),
        (1, _) => top,
        (_, 1) => bottom,
        _ => Term::compose(top, bottom).expect("spider term is well-typed"),
    }
}

/// Route wire `p` to position `dest[p]` using adjacent symmetries.
pub fn permutation_term(x: &ClassicalObject, dest: &[usize]) -> Term {
    let k = dest.len();
    let xt = ObjectType::classical(x);
    if k == 0 {
        return Term::Identity(ObjectType::unit());
    }
    // target[q] = wire that must end at position q
    let mut target = vec![0usize; k];
    for (p, &q) in dest.iter().enumerate() {
        target[q] = p;
    }
    let mut current: Vec<usize> = (0..k).collect();
    let mut layers: Vec<Term> = Vec::new();
    for q in 0..k {
        let j = current
            .iter()
            .position(|&w| w == target[q])
            .expect("wire present");
        for jj in (q..j).rev() {
            current.swap(jj, jj + 1);
            let mut parts: Vec<Term> = Vec::new();
            if jj > 0 {
                parts.push(Term::Identity(ObjectType::power(x.factor(), jj)));
            }
            parts.push(Term::swap(xt.clone(), xt.clone()));
            if k > jj + 2 {
                parts.push(Term::Identity(ObjectType::power(x.factor(), k - jj - 2)));
            }
            layers.push(Term::tensor_chain(parts));
        }
    }
    if layers.is_empty() {
        Term::Identity(ObjectType::power(x.factor(), k))
    } else {
        Term::compose_chain(layers).expect("swap layers are well-typed")
    }
}

/// Rebuild the term of a normal form: per component a bare wire or the
/// `(m, n)` dot, tensored in component order and wrapped in the
/// boundary permutations.
pub fn from_normal_form(nf: &NormalForm, x: &ClassicalObject) -> Term {
    nf.validate().expect("normal form is well-formed");
    let grouped_inputs: Vec<PortId> = nf
        .components
        .iter()
        .flat_map(|c| c.boundary_inputs.iter().copied())
        .collect();
    let grouped_outputs: Vec<PortId> = nf
        .components
        .iter()
        .flat_map(|c| c.boundary_outputs.iter().copied())
        .collect();

    let middle = Term::tensor_chain(nf.components.iter().map(|c| {
        if c.bare_wire {
            Term::Identity(ObjectType::classical(x))
        } else {
            spider_term(x, c.m, c.n)
        }
    }));

    // original order -> grouped order
    let dest_in: Vec<usize> = nf
        .inputs
        .iter()
        .map(|p| {
            grouped_inputs
                .iter()
                .position(|q| q == p)
                .expect("input covered")
        })
        .collect();
    // grouped order -> original order
    let dest_out: Vec<usize> = grouped_outputs
        .iter()
        .map(|p| {
            nf.outputs
                .iter()
                .position(|q| q == p)
                .expect("output covered")
        })
        .collect();

    let perm_in = permutation_term(x, &dest_in);
    let perm_out = permutation_term(x, &dest_out);
    let inner = Term::compose(middle, perm_in).expect("normal form composite");
    Term::compose(perm_out, inner).expect("normal form composite")
}

/// Readback of an arbitrary network as a term: spiders enter as
/// `δ_L ∘ ε†` states, internal wires close with caps, and a synthesised
/// permutation routes everything to the boundary in order. Exact but
/// exponential in wire count under evaluation, so meant for small nets.
pub fn network_to_term(net: &ClassicalNetwork) -> NetResult<Term> {
    let x = &net.obj;
    #[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
    struct Slot(usize);

    // Source inventory: spider legs, cup-edge legs, then input wires.
    let mut source_of_leg: BTreeMap<(EdgeId, u8), Slot> = BTreeMap::new();
    let mut bottom_parts: Vec<Term> = Vec::new();
    let mut next_slot = 0usize;

    let spiders: Vec<SpiderId> = net.spiders.iter().copied().collect();
    for s in &spiders {
        let mut legs: Vec<(EdgeId, u8)> = Vec::new();
        for (id, edge) in &net.edges {
            if edge.a == Endpoint::Spider(*s) {
                legs.push((*id, 0));
            }
            if edge.b == Endpoint::Spider(*s) {
                legs.push((*id, 1));
            }
        }
        legs.sort();
        let degree = legs.len();
        for leg in legs {
            source_of_leg.insert(leg, Slot(next_slot));
            next_slot += 1;
        }
        // state I → X^degree carrying the dot
        let state = if degree == 0 {
            Term::compose(Term::epsilon(x), Term::dagger(Term::epsilon(x)))
                .expect("scalar dot state")
        } else {
            Term::compose(delta_n(x, degree), Term::dagger(Term::epsilon(x))).expect("dot state")
        };
        bottom_parts.push(state);
    }

    // Output-output edges need a cup state feeding both ends.
    let mut cup_edges: Vec<EdgeId> = Vec::new();
    for (id, edge) in &net.edges {
        if let (Endpoint::Port(p), Endpoint::Port(q)) = (edge.a, edge.b) {
            if net.is_output(p) && net.is_output(q) {
                cup_edges.push(*id);
            }
        }
    }
    for id in &cup_edges {
        source_of_leg.insert((*id, 0), Slot(next_slot));
        source_of_leg.insert((*id, 1), Slot(next_slot + 1));
        next_slot += 2;
        bottom_parts.push(Term::cup(x.factor()));
    }

    let mut source_of_input: BTreeMap<PortId, Slot> = BTreeMap::new();
    for p in &net.inputs {
        source_of_input.insert(*p, Slot(next_slot));
        next_slot += 1;
    }
    if !net.inputs.is_empty() {
        bottom_parts.push(Term::Identity(ObjectType::power(
            x.factor(),
            net.inputs.len(),
        )));
    }

    let total_slots = next_slot;
    let n_out = net.outputs.len();

    // Where each source slot must land: outputs first, cap pairs after.
    let mut dest = vec![usize::MAX; total_slots];
    let mut cap_pairs: Vec<(Slot, Slot)> = Vec::new();
    let slot_of = |end: Endpoint,
                   id: EdgeId,
                   leg: u8,
                   source_of_leg: &BTreeMap<(EdgeId, u8), Slot>,
                   source_of_input: &BTreeMap<PortId, Slot>|
     -> Option<Slot> {
        match end {
            Endpoint::Spider(_) => Some(source_of_leg[&(id, leg)]),
            Endpoint::Port(p) if net.is_input(p) => Some(source_of_input[&p]),
            Endpoint::Port(_) => None,
        }
    };
    let out_position = |p: PortId| {
        net.outputs
            .iter()
            .position(|q| *q == p)
            .expect("output port")
    };

    for (id, edge) in &net.edges {
        if cup_edges.contains(id) {
            let (p, q) = match (edge.a, edge.b) {
                (Endpoint::Port(p), Endpoint::Port(q)) => (p, q),
                _ => unreachable!(),
            };
            dest[source_of_leg[&(*id, 0)].0] = out_position(p);
            dest[source_of_leg[&(*id, 1)].0] = out_position(q);
            continue;
        }
        let sa = slot_of(edge.a, *id, 0, &source_of_leg, &source_of_input);
        let sb = slot_of(edge.b, *id, 1, &source_of_leg, &source_of_input);
        match (sa, sb) {
            (Some(s1), Some(s2)) => cap_pairs.push((s1, s2)),
            (Some(s), None) => {
                let p = match edge.b {
                    Endpoint::Port(p) => p,
                    _ => unreachable!(),
                };
                dest[s.0] = out_position(p);
            }
            (None, Some(s)) => {
                let p = match edge.a {
                    Endpoint::Port(p) => p,
                    _ => unreachable!(),
                };
                dest[s.0] = out_position(p);
            }
            (None, None) => unreachable!("output-output edges handled above"),
        }
    }
    for (r, (s1, s2)) in cap_pairs.iter().enumerate() {
        dest[s1.0] = n_out + 2 * r;
        dest[s2.0] = n_out + 2 * r + 1;
    }
    debug_assert!(dest.iter().all(|&d| d != usize::MAX));

    let bottom = Term::tensor_chain(bottom_parts);
    let perm = permutation_term(x, &dest);
    let mut top_parts: Vec<Term> = Vec::new();
    top_parts.push(Term::Identity(ObjectType::power(x.factor(), n_out)));
    for _ in 0..cap_pairs.len() {
        top_parts.push(Term::cap(x.factor()));
    }
    let top = Term::tensor_chain(top_parts);

    let inner = Term::compose(perm, bottom).map_err(|e| NetError::Malformed(e.to_string()))?;
    Term::compose(top, inner).map_err(|e| NetError::Malformed(e.to_string()))
}
