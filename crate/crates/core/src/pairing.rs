//! Face-pairing propagation: from seed pairings, walk around edges to derive
//! the remaining pairings, the edge cycles and their relations.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashMap, HashSet};

use nalgebra::DMatrix;
use num_bigint::BigInt;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::homology::{abelianize, in_row_lattice};
use crate::polytope::{edge_key, CombinatorialPolyhedron, Edge};

/// Freely reduced word; letters carry exponent +-1.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupWord(Vec<(String, i8)>);

impl GroupWord {
    pub fn identity() -> Self {
        GroupWord(Vec::new())
    }

    pub fn generator(name: &str) -> Self {
        GroupWord(vec![(name.to_string(), 1)])
    }

    pub fn from_letters(letters: impl IntoIterator<Item = (String, i8)>) -> Self {
        let mut w = GroupWord::identity();
        for (g, e) in letters {
            w.push(g, e);
        }
        w
    }

    fn push(&mut self, g: String, e: i8) {
        if let Some((h, f)) = self.0.last() {
            if *h == g && *f == -e {
                self.0.pop();
                return;
            }
        }
        self.0.push((g, e));
    }

    /// Space-separated powers, e.g. `a^3 b^-1 a^-1`; `1` is the identity.
    pub fn parse(s: &str) -> Result<Self> {
        let mut w = GroupWord::identity();
        for tok in s.split_whitespace() {
            if tok == "1" {
                continue;
            }
            let (name, exp) = match tok.split_once('^') {
                Some((n, e)) => (
                    n,
                    e.parse::<i64>()
                        .map_err(|_| Error::Fixture(format!("bad exponent in {tok:?}")))?,
                ),
                None => (tok, 1),
            };
            let ok = name.chars().next().is_some_and(|c| c.is_alphabetic())
                && name.chars().all(|c| c.is_alphanumeric() || c == '_');
            if !ok {
                return Err(Error::Fixture(format!("bad generator name {name:?}")));
            }
            let e = exp.signum() as i8;
            for _ in 0..exp.unsigned_abs() {
                w.push(name.to_string(), e);
            }
        }
        Ok(w)
    }

    pub fn letters(&self) -> &[(String, i8)] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inverse(&self) -> Self {
        GroupWord(self.0.iter().rev().map(|(g, e)| (g.clone(), -e)).collect())
    }

    pub fn mul(&self, other: &GroupWord) -> Self {
        let mut w = self.clone();
        for (g, e) in &other.0 {
            w.push(g.clone(), *e);
        }
        w
    }

    pub fn exponent_sum(&self, g: &str) -> i64 {
        self.0.iter().filter(|(h, _)| h == g).map(|(_, e)| *e as i64).sum()
    }

    /// Cancel inverse letters across the ends.
    pub fn cyclically_reduced(&self) -> Self {
        let mut v = self.0.clone();
        while v.len() >= 2 {
            let (a, b) = (&v[0], &v[v.len() - 1]);
            if a.0 == b.0 && a.1 == -b.1 {
                v.pop();
                v.remove(0);
            } else {
                break;
            }
        }
        GroupWord(v)
    }

    /// Equal up to cyclic permutation and inversion.
    pub fn is_cyclic_conjugate(&self, other: &GroupWord) -> bool {
        let a = self.cyclically_reduced();
        let b = other.cyclically_reduced();
        if a.len() != b.len() {
            return false;
        }
        if a.is_empty() {
            return true;
        }
        let n = a.len();
        [b.clone(), b.inverse()]
            .iter()
            .any(|c| (0..n).any(|r| (0..n).all(|i| a.0[i] == c.0[(i + r) % n])))
    }

    pub fn generators(&self) -> BTreeSet<String> {
        self.0.iter().map(|(g, _)| g.clone()).collect()
    }
}

impl std::fmt::Display for GroupWord {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let mut parts = Vec::new();
        let mut i = 0;
        while i < self.0.len() {
            let mut j = i;
            while j < self.0.len() && self.0[j] == self.0[i] {
                j += 1;
            }
            let n = (j - i) as i64 * self.0[i].1 as i64;
            let g = &self.0[i].0;
            parts.push(if n == 1 { g.clone() } else { format!("{g}^{n}") });
            i = j;
        }
        write!(f, "{}", parts.join(" "))
    }
}

impl Serialize for GroupWord {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for GroupWord {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        GroupWord::parse(&s).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FacePairingSeed {
    pub name: String,
    pub source: String,
    pub target: String,
    /// Directed edge of the source face boundary ...
    pub src_edge: [usize; 2],
    /// ... and its image on the target face.
    pub dst_edge: [usize; 2],
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpecialClass {
    pub size: usize,
    pub edge_hints: Vec<[usize; 2]>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupPresentation {
    pub generators: Vec<String>,
    pub relators: Vec<GroupWord>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pairing {
    pub name: String,
    pub word: GroupWord,
    pub source: String,
    pub target: String,
    /// Source vertex -> target vertex.
    pub vertex_map: Vec<[usize; 2]>,
    pub seed: bool,
    /// Class at which the pairing was derived.
    pub derived_at: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClassOutcome {
    NewPairing {
        pairing: String,
    },
    Trivial,
    Defining,
    /// Reduced to the identity with the listed defining classes.
    Consequence {
        using: Vec<usize>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeClass {
    pub number: usize,
    pub edges: Vec<[usize; 2]>,
    pub size: usize,
    pub declared_size: usize,
    /// Face labels met around the edge, composed right to left.
    pub factors: Vec<GroupWord>,
    /// Cycle word; for a new pairing, the derived word.
    pub word: GroupWord,
    pub outcome: ClassOutcome,
}

impl EdgeClass {
    pub fn is_relation(&self) -> bool {
        !matches!(self.outcome, ClassOutcome::NewPairing { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexClass {
    pub vertices: Vec<usize>,
    /// Distinct edge classes meeting the class.
    pub edge_classes: Vec<usize>,
    /// Edge class -> number of incident edge ends.
    pub incidence: BTreeMap<usize, usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairingResult {
    pub polyhedron: String,
    pub cells_per_edge: usize,
    pub generators: Vec<String>,
    pub pairings: Vec<Pairing>,
    pub classes: Vec<EdgeClass>,
    pub vertex_classes: Vec<VertexClass>,
    pub presentation: GroupPresentation,
    /// Face id -> the pairing word that maps its partner onto it.
    pub face_labels: BTreeMap<String, GroupWord>,
    pub trace: Vec<String>,
}

impl PairingResult {
    pub fn class(&self, number: usize) -> Option<&EdgeClass> {
        self.classes.iter().find(|c| c.number == number)
    }

    /// Class number of every undirected edge.
    pub fn edge_class_map(&self) -> BTreeMap<Edge, usize> {
        self.classes
            .iter()
            .flat_map(|c| c.edges.iter().map(move |e| (edge_key(e[0], e[1]), c.number)))
            .collect()
    }

    pub fn face_pairs(&self) -> usize {
        self.pairings.len()
    }
}

#[derive(Clone, Debug)]
pub struct PropagateOptions {
    /// Edges scanned first, before the remaining edges in sorted order.
    pub edge_order: Vec<Edge>,
    /// Short names for derived words.
    pub aliases: BTreeMap<String, GroupWord>,
    /// Number given to the first class.
    pub first_class_number: usize,
    pub max_depth: usize,
    pub node_budget: usize,
}

impl Default for PropagateOptions {
    fn default() -> Self {
        PropagateOptions {
            edge_order: Vec::new(),
            aliases: BTreeMap::new(),
            first_class_number: 1,
            max_depth: 20,
            node_budget: 2_000,
        }
    }
}

enum Walk {
    Closed(Vec<(Edge, usize)>),
    /// Steps so far, last edge, unpaired exit face.
    Stuck(Vec<(Edge, usize)>, Edge, usize),
    Overflow,
}

enum Outcome {
    Relation {
        edges: Vec<Edge>,
        factors: Vec<GroupWord>,
        word: GroupWord,
    },
    Derive {
        edges: Vec<Edge>,
        from: usize,
        to: usize,
        map: HashMap<usize, usize>,
        word: GroupWord,
        factors: Vec<GroupWord>,
    },
    Pending,
    Contradiction(String),
}

struct Engine<'a> {
    poly: &'a CombinatorialPolyhedron,
    dedge: HashMap<Edge, usize>,
    k: usize,
    special: HashMap<Edge, usize>,
    label: Vec<Option<GroupWord>>,
    partner: Vec<Option<usize>>,
    vmap: Vec<HashMap<usize, usize>>,
    classified: HashMap<Edge, usize>,
}

impl<'a> Engine<'a> {
    fn other(&self, e: Edge, f: usize) -> usize {
        let f1 = self.dedge[&(e.0, e.1)];
        let f2 = self.dedge[&(e.1, e.0)];
        if f == f1 {
            f2
        } else {
            f1
        }
    }

    fn pair(&mut self, src: usize, dst: usize, map: HashMap<usize, usize>, word: GroupWord) {
        self.label[dst] = Some(word.clone());
        self.label[src] = Some(word.inverse());
        self.partner[src] = Some(dst);
        self.partner[dst] = Some(src);
        self.vmap[dst] = map.iter().map(|(&a, &b)| (b, a)).collect();
        self.vmap[src] = map;
    }

    fn label(&self, f: usize) -> &GroupWord {
        self.label[f].as_ref().expect("paired face has a label")
    }

    /// Enter at `e` through face `entered`, leave through the other face,
    /// and follow its pairing.
    fn walk(&self, e: Edge, entered: usize, limit: usize) -> Walk {
        let mut steps = Vec::new();
        let start = (e, entered);
        let mut cur = start;
        loop {
            let (e, ent) = cur;
            let x = self.other(e, ent);
            let Some(p) = self.partner[x] else {
                return Walk::Stuck(steps, e, x);
            };
            let m = &self.vmap[x];
            let e2 = edge_key(m[&e.0], m[&e.1]);
            steps.push((e, x));
            cur = (e2, p);
            if cur == start {
                return Walk::Closed(steps);
            }
            if steps.len() > limit {
                return Walk::Overflow;
            }
        }
    }

    fn compose(&self, steps: &[(Edge, usize)]) -> GroupWord {
        steps
            .iter()
            .fold(GroupWord::identity(), |w, (_, x)| self.label(*x).mul(&w))
    }

    fn try_edge(&self, e: Edge) -> Outcome {
        let k = self.special.get(&e).copied().unwrap_or(self.k);
        let f1 = self.dedge[&(e.0, e.1)];
        let f2 = self.dedge[&(e.1, e.0)];
        let (fs, ef, y) = match self.walk(e, f2, 4 * k) {
            Walk::Closed(steps) => {
                if steps.len() != k {
                    return Outcome::Contradiction(format!(
                        "edge ({},{}) closes a cycle of length {}, declared {k}",
                        e.0,
                        e.1,
                        steps.len()
                    ));
                }
                let factors: Vec<GroupWord> = steps.iter().rev().map(|(_, x)| self.label(*x).clone()).collect();
                return Outcome::Relation {
                    edges: steps.iter().map(|s| s.0).collect(),
                    word: self.compose(&steps),
                    factors,
                };
            }
            Walk::Overflow => return Outcome::Contradiction(format!("edge ({},{}) cycle exceeds {}", e.0, e.1, 4 * k)),
            Walk::Stuck(s, last, x) => (s, last, x),
        };
        let (bs, eb, z) = match self.walk(e, f1, 4 * k) {
            Walk::Stuck(s, last, x) => (s, last, x),
            _ => return Outcome::Contradiction(format!("edge ({},{}) closes one way only", e.0, e.1)),
        };
        let mut all: Vec<Edge> = fs.iter().map(|s| s.0).collect();
        all.push(ef);
        all.extend(bs.iter().skip(1).map(|s| s.0));
        if !bs.is_empty() {
            all.push(eb);
        }
        let uniq: HashSet<&Edge> = all.iter().collect();
        if uniq.len() != all.len() {
            return Outcome::Contradiction(format!("edge ({},{}) cycle repeats an edge", e.0, e.1));
        }
        if all.len() < k {
            return Outcome::Pending;
        }
        if all.len() > k {
            return Outcome::Contradiction(format!(
                "edge ({},{}) cycle has {} edges, declared {k}",
                e.0,
                e.1,
                all.len()
            ));
        }
        let (cz, cy) = (&self.poly.faces[z].cycle, &self.poly.faces[y].cycle);
        if y == z || cz.len() != cy.len() {
            return Outcome::Contradiction(format!(
                "edge ({},{}) would pair {} with {}",
                e.0, e.1, self.poly.faces[z].id, self.poly.faces[y].id
            ));
        }
        let wf = self.compose(&fs);
        let wb = self.compose(&bs);
        let word = wb.mul(&wf.inverse());
        // directed eb on Z maps to the reverse of directed ef on Y
        let (_, q) = if self.dedge.get(&eb) == Some(&z) {
            eb
        } else {
            (eb.1, eb.0)
        };
        let (s, _) = if self.dedge.get(&ef) == Some(&y) {
            ef
        } else {
            (ef.1, ef.0)
        };
        let n = cz.len();
        let i = cz.iter().position(|&v| v == q).unwrap();
        let j = cy.iter().position(|&v| v == s).unwrap();
        let map = (0..n).map(|r| (cz[(i + r) % n], cy[(j + n - r) % n])).collect();
        let mut factors: Vec<GroupWord> = bs.iter().rev().map(|(_, x)| self.label(*x).clone()).collect();
        factors.extend(fs.iter().map(|(_, x)| self.label(*x).inverse()));
        Outcome::Derive {
            edges: all,
            from: z,
            to: y,
            map,
            word,
            factors,
        }
    }
}

fn seed_map(poly: &CombinatorialPolyhedron, s: &FacePairingSeed) -> Result<(usize, usize, HashMap<usize, usize>)> {
    let src = poly
        .face_index(&s.source)
        .ok_or_else(|| Error::UnknownFace(s.source.clone()))?;
    let dst = poly
        .face_index(&s.target)
        .ok_or_else(|| Error::UnknownFace(s.target.clone()))?;
    if src == dst {
        return Err(Error::Fixture(format!("seed {} pairs a face with itself", s.name)));
    }
    let (c, d) = (&poly.faces[src].cycle, &poly.faces[dst].cycle);
    if c.len() != d.len() {
        return Err(Error::Fixture(format!(
            "seed {} pairs faces of different sizes",
            s.name
        )));
    }
    let n = c.len();
    let i = c.iter().position(|&v| v == s.src_edge[0]);
    let j = d.iter().position(|&v| v == s.dst_edge[0]);
    let (Some(i), Some(j)) = (i, j) else {
        return Err(Error::Fixture(format!("seed {} edge not on its faces", s.name)));
    };
    let map: HashMap<usize, usize> = (0..n).map(|r| (c[(i + r) % n], d[(j + n - r) % n])).collect();
    if map.get(&s.src_edge[1]) != Some(&s.dst_edge[1]) {
        return Err(Error::Fixture(format!(
            "seed {} edge correspondence does not reverse the induced orientation",
            s.name
        )));
    }
    Ok((src, dst, map))
}

pub fn propagate(
    poly: &CombinatorialPolyhedron,
    seeds: &[FacePairingSeed],
    cells_per_edge: usize,
    special: &[SpecialClass],
    opts: &PropagateOptions,
) -> Result<PairingResult> {
    if cells_per_edge < 3 {
        return Err(Error::Fixture("cells_per_edge must be at least 3".into()));
    }
    let report = poly.validate();
    if !report.ok {
        return Err(Error::Polyhedron(report.violations.join("; ")));
    }
    let nf = poly.faces.len();
    let mut eng = Engine {
        poly,
        dedge: poly.directed_edges(),
        k: cells_per_edge,
        special: special
            .iter()
            .flat_map(|s| s.edge_hints.iter().map(move |e| (edge_key(e[0], e[1]), s.size)))
            .collect(),
        label: vec![None; nf],
        partner: vec![None; nf],
        vmap: vec![HashMap::new(); nf],
        classified: HashMap::new(),
    };
    let generators: Vec<String> = seeds.iter().map(|s| s.name.clone()).collect();
    let mut pairings = Vec::new();
    let mut trace = Vec::new();
    for s in seeds {
        let (src, dst, map) = seed_map(poly, s)?;
        if eng.partner[src].is_some() || eng.partner[dst].is_some() {
            return Err(Error::Fixture(format!("seed {} reuses a paired face", s.name)));
        }
        if generators.iter().filter(|g| **g == s.name).count() > 1 {
            return Err(Error::Fixture(format!("duplicate generator {}", s.name)));
        }
        trace.push(format!("seed {}: {} -> {}", s.name, s.source, s.target));
        pairings.push(make_pairing(
            poly,
            s.name.clone(),
            GroupWord::generator(&s.name),
            src,
            dst,
            &map,
            true,
            None,
        ));
        eng.pair(src, dst, map, GroupWord::generator(&s.name));
    }
    let mut order: Vec<Edge> = Vec::new();
    let mut in_order = HashSet::new();
    for e in opts.edge_order.iter().map(|e| edge_key(e.0, e.1)).chain(poly.edges()) {
        if eng.dedge.contains_key(&e) && in_order.insert(e) {
            order.push(e);
        }
    }
    let gen_index: HashMap<String, i32> = generators
        .iter()
        .enumerate()
        .map(|(i, g)| (g.clone(), i as i32 + 1))
        .collect();
    let mut classes: Vec<EdgeClass> = Vec::new();
    let mut defining: Vec<(usize, Vec<i32>)> = Vec::new();
    loop {
        let mut progressed = false;
        for &e in &order {
            if eng.classified.contains_key(&e) {
                continue;
            }
            let (f1, f2) = (eng.dedge[&(e.0, e.1)], eng.dedge[&(e.1, e.0)]);
            if eng.partner[f1].is_none() && eng.partner[f2].is_none() {
                continue;
            }
            let number = opts.first_class_number + classes.len();
            let declared = eng.special.get(&e).copied().unwrap_or(cells_per_edge);
            match eng.try_edge(e) {
                Outcome::Pending => continue,
                Outcome::Contradiction(msg) => {
                    trace.push(format!("class {number}: contradiction: {msg}"));
                    return Err(Error::Contradiction { message: msg, trace });
                }
                Outcome::Relation { edges, factors, word } => {
                    let reduced = word.cyclically_reduced();
                    let outcome = if reduced.is_empty() {
                        ClassOutcome::Trivial
                    } else {
                        let letters = to_letters(&reduced, &gen_index);
                        let rels: Vec<Vec<i32>> = defining.iter().map(|d| d.1.clone()).collect();
                        match consequence_search(&letters, &rels, opts.max_depth, opts.node_budget) {
                            Some(path) => ClassOutcome::Consequence {
                                using: path.iter().map(|&k| defining[k].0).collect(),
                            },
                            None => {
                                defining.push((number, letters));
                                ClassOutcome::Defining
                            }
                        }
                    };
                    trace.push(format!("class {number}: relation {word} ({outcome:?})"));
                    for &x in &edges {
                        eng.classified.insert(x, number);
                    }
                    classes.push(EdgeClass {
                        number,
                        edges: edges.iter().map(|e| [e.0, e.1]).collect(),
                        size: edges.len(),
                        declared_size: declared,
                        factors,
                        word,
                        outcome,
                    });
                }
                Outcome::Derive {
                    edges,
                    from,
                    to,
                    map,
                    word,
                    factors,
                } => {
                    let name = alias_for(&word, &opts.aliases);
                    trace.push(format!(
                        "class {number}: new pairing {name} = {word}: {} -> {}",
                        poly.faces[from].id, poly.faces[to].id
                    ));
                    pairings.push(make_pairing(
                        poly,
                        name.clone(),
                        word.clone(),
                        from,
                        to,
                        &map,
                        false,
                        Some(number),
                    ));
                    eng.pair(from, to, map, word.clone());
                    for &x in &edges {
                        eng.classified.insert(x, number);
                    }
                    classes.push(EdgeClass {
                        number,
                        edges: edges.iter().map(|e| [e.0, e.1]).collect(),
                        size: edges.len(),
                        declared_size: declared,
                        factors,
                        word,
                        outcome: ClassOutcome::NewPairing { pairing: name },
                    });
                }
            }
            progressed = true;
            break;
        }
        if !progressed {
            break;
        }
    }
    let unpaired: Vec<&str> = (0..nf)
        .filter(|&f| eng.partner[f].is_none())
        .map(|f| poly.faces[f].id.as_str())
        .collect();
    let unclassified = order.iter().filter(|e| !eng.classified.contains_key(e)).count();
    if !unpaired.is_empty() || unclassified > 0 {
        let message = format!(
            "{} unpaired faces ({}), {unclassified} unclassified edges",
            unpaired.len(),
            unpaired.join(", ")
        );
        trace.push(message.clone());
        return Err(Error::Orphan { message, trace });
    }
    let vertex_classes = vertex_classes_of(poly, &eng.vmap, &eng.classified);
    let presentation = GroupPresentation {
        generators: generators.clone(),
        relators: classes
            .iter()
            .filter(|c| c.outcome == ClassOutcome::Defining)
            .map(|c| c.word.clone())
            .collect(),
    };
    Ok(PairingResult {
        polyhedron: poly.name.clone(),
        cells_per_edge,
        generators,
        pairings,
        classes,
        vertex_classes,
        presentation,
        face_labels: (0..nf)
            .map(|f| (poly.faces[f].id.clone(), eng.label(f).clone()))
            .collect(),
        trace,
    })
}

#[allow(clippy::too_many_arguments)]
fn make_pairing(
    poly: &CombinatorialPolyhedron,
    name: String,
    word: GroupWord,
    src: usize,
    dst: usize,
    map: &HashMap<usize, usize>,
    seed: bool,
    derived_at: Option<usize>,
) -> Pairing {
    let mut vm: Vec<[usize; 2]> = map.iter().map(|(&a, &b)| [a, b]).collect();
    vm.sort();
    Pairing {
        name,
        word,
        source: poly.faces[src].id.clone(),
        target: poly.faces[dst].id.clone(),
        vertex_map: vm,
        seed,
        derived_at,
    }
}

fn alias_for(word: &GroupWord, aliases: &BTreeMap<String, GroupWord>) -> String {
    for (name, w) in aliases {
        if w == word {
            return name.clone();
        }
    }
    for (name, w) in aliases {
        if w.inverse() == *word {
            return format!("{name}^-1");
        }
    }
    word.to_string()
}

fn vertex_classes_of(
    poly: &CombinatorialPolyhedron,
    vmap: &[HashMap<usize, usize>],
    classified: &HashMap<Edge, usize>,
) -> Vec<VertexClass> {
    let n = poly.vertices.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let nx = p[y];
            p[y] = r;
            y = nx;
        }
        r
    }
    for m in vmap {
        for (&a, &b) in m {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for v in 0..n {
        let r = find(&mut parent, v);
        groups.entry(r).or_default().push(v);
    }
    groups
        .into_values()
        .map(|vertices| {
            let mut incidence = BTreeMap::new();
            for (e, &c) in classified {
                if vertices.contains(&e.0) {
                    *incidence.entry(c).or_insert(0) += 1;
                }
                if vertices.contains(&e.1) {
                    *incidence.entry(c).or_insert(0) += 1;
                }
            }
            VertexClass {
                edge_classes: incidence.keys().copied().collect(),
                vertices,
                incidence,
            }
        })
        .collect()
}

fn to_letters(w: &GroupWord, index: &HashMap<String, i32>) -> Vec<i32> {
    w.letters().iter().map(|(g, e)| index[g] * *e as i32).collect()
}

fn free_reduce(w: &[i32]) -> Vec<i32> {
    let mut out: Vec<i32> = Vec::with_capacity(w.len());
    for &x in w {
        if out.last() == Some(&-x) {
            out.pop();
        } else {
            out.push(x);
        }
    }
    out
}

fn cyclic_reduce(w: &[i32]) -> Vec<i32> {
    let mut v = free_reduce(w);
    while v.len() >= 2 && v[0] == -v[v.len() - 1] {
        v.pop();
        v.remove(0);
    }
    v
}

fn canonical_rotation(w: &[i32]) -> Vec<i32> {
    let n = w.len();
    let at = |r: usize| (0..n).map(move |i| w[(r + i) % n]);
    let best = (0..n).min_by(|&a, &b| at(a).cmp(at(b))).unwrap_or(0);
    at(best).collect()
}

/// Best-first search for a sequence of insertions of cyclic conjugates of
/// the relators (or their inverses) that reduces the cyclic word `w` to the
/// empty word. Returns the relator indices used.
pub fn consequence_search(w: &[i32], relators: &[Vec<i32>], max_depth: usize, budget: usize) -> Option<Vec<usize>> {
    let start = cyclic_reduce(w);
    if start.is_empty() {
        return Some(Vec::new());
    }
    // every cyclic conjugate of every relator and inverse, indexed by first and last letter
    let mut pool: Vec<(Vec<i32>, usize)> = Vec::new();
    for (k, r) in relators.iter().enumerate() {
        let r = cyclic_reduce(r);
        let inv: Vec<i32> = r.iter().rev().map(|x| -x).collect();
        for base in [r, inv] {
            for s in 0..base.len() {
                let mut v = base.clone();
                v.rotate_left(s);
                pool.push((v, k));
            }
        }
    }
    if pool.is_empty() {
        return None;
    }
    let mut by_first: HashMap<i32, Vec<usize>> = HashMap::new();
    let mut by_last: HashMap<i32, Vec<usize>> = HashMap::new();
    for (i, (v, _)) in pool.iter().enumerate() {
        by_first.entry(v[0]).or_default().push(i);
        by_last.entry(v[v.len() - 1]).or_default().push(i);
    }
    let longest = pool.iter().map(|(v, _)| v.len()).max().unwrap_or(0);
    let max_len = start.len().max(longest) + longest;
    let mut heap = BinaryHeap::new();
    let mut nodes: Vec<(Vec<i32>, Vec<usize>)> = vec![(start.clone(), Vec::new())];
    let mut visited: HashSet<Vec<i32>> = HashSet::from([canonical_rotation(&start)]);
    heap.push(Reverse((start.len(), 0usize, 0usize)));
    let mut expanded = 0;
    while let Some(Reverse((_, depth, id))) = heap.pop() {
        expanded += 1;
        if expanded > budget {
            return None;
        }
        if depth >= max_depth {
            continue;
        }
        let (word, path) = nodes[id].clone();
        let n = word.len();
        for p in 0..n {
            let mut rot = word.clone();
            rot.rotate_left(p);
            // insert between rot[n-1] and rot[0]
            let mut cands: BTreeSet<usize> = BTreeSet::new();
            if let Some(v) = by_first.get(&-rot[n - 1]) {
                cands.extend(v);
            }
            if let Some(v) = by_last.get(&-rot[0]) {
                cands.extend(v);
            }
            for &c in &cands {
                let (rho, k) = &pool[c];
                let mut cat = rot.clone();
                cat.extend_from_slice(rho);
                let next = cyclic_reduce(&cat);
                if next.len() > max_len {
                    continue;
                }
                let mut np = path.clone();
                np.push(*k);
                if next.is_empty() {
                    return Some(np);
                }
                if visited.insert(canonical_rotation(&next)) {
                    nodes.push((next.clone(), np));
                    heap.push(Reverse((next.len(), depth + 1, nodes.len() - 1)));
                }
            }
        }
    }
    None
}

/// Metric data of the fundamental polyhedron, in the fixture's vertex ids.
#[derive(Clone, Debug, Default)]
pub struct MetricData {
    pub dihedral: BTreeMap<Edge, f64>,
    /// Pairing matrices by pairing name, acting on rows.
    pub generators: BTreeMap<String, DMatrix<f64>>,
    /// Compare products with the identity up to sign.
    pub projective: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngleSum {
    pub class: usize,
    pub sum: f64,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelationResidual {
    pub class: usize,
    pub residual: f64,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub class_sizes_ok: bool,
    pub class_size_failures: Vec<String>,
    pub all_faces_paired: bool,
    pub vertex_classes: usize,
    pub edge_classes: usize,
    pub face_pairs: usize,
    /// vertex classes - edge classes + face pairs - 1
    pub euler: i64,
    pub euler_ok: bool,
    /// Every relation lies in the lattice spanned by the defining relators.
    pub relations_abelian_ok: bool,
    /// Only classes whose every edge carries a dihedral angle.
    pub angle_sums: Vec<AngleSum>,
    pub angles_ok: Option<bool>,
    pub relation_residuals: Vec<RelationResidual>,
    pub relations_metric_ok: Option<bool>,
    pub ok: bool,
}

/// Evaluate a word as the row-action product of the pairing matrices.
pub fn evaluate_word(w: &GroupWord, gens: &BTreeMap<String, DMatrix<f64>>) -> Option<DMatrix<f64>> {
    let n = gens.values().next()?.nrows();
    let mut m = DMatrix::identity(n, n);
    for (g, e) in w.letters() {
        let x = gens.get(g)?;
        m = if *e > 0 { m * x } else { m * x.clone().try_inverse()? };
    }
    Some(m)
}

pub fn verify_space_form(result: &PairingResult, metric: Option<&MetricData>, tol: f64) -> VerificationReport {
    let class_size_failures: Vec<String> = result
        .classes
        .iter()
        .filter(|c| c.size != c.declared_size)
        .map(|c| format!("class {} has {} edges, declared {}", c.number, c.size, c.declared_size))
        .collect();
    let paired: BTreeSet<&str> = result
        .pairings
        .iter()
        .flat_map(|p| [p.source.as_str(), p.target.as_str()])
        .collect();
    let all_faces_paired = paired.len() == result.face_labels.len();
    let (v, e, f) = (result.vertex_classes.len(), result.classes.len(), result.face_pairs());
    let euler = v as i64 - e as i64 + f as i64 - 1;
    let lattice = abelianize(&result.presentation);
    let relations_abelian_ok = result.classes.iter().filter(|c| c.is_relation()).all(|c| {
        let row: Vec<BigInt> = result
            .generators
            .iter()
            .map(|g| BigInt::from(c.word.exponent_sum(g)))
            .collect();
        in_row_lattice(&lattice, &row)
    });
    let mut angle_sums = Vec::new();
    let mut relation_residuals = Vec::new();
    if let Some(m) = metric {
        for c in &result.classes {
            let angles: Option<Vec<f64>> = c
                .edges
                .iter()
                .map(|x| m.dihedral.get(&edge_key(x[0], x[1])).copied())
                .collect();
            if let Some(a) = angles {
                let sum: f64 = a.iter().sum();
                angle_sums.push(AngleSum {
                    class: c.number,
                    sum,
                    ok: (sum - 2.0 * std::f64::consts::PI).abs() < tol,
                });
            }
        }
        if !m.generators.is_empty() {
            for c in result.classes.iter().filter(|c| c.is_relation()) {
                let residual = match evaluate_word(&c.word, &m.generators) {
                    Some(p) => {
                        let id = DMatrix::identity(p.nrows(), p.ncols());
                        let r = (&p - &id).amax();
                        if m.projective {
                            r.min((&p + &id).amax())
                        } else {
                            r
                        }
                    }
                    None => f64::INFINITY,
                };
                relation_residuals.push(RelationResidual {
                    class: c.number,
                    residual,
                    ok: residual < 1e-7,
                });
            }
        }
    }
    let angles_ok = metric.map(|_| angle_sums.iter().all(|a| a.ok));
    let relations_metric_ok = metric
        .filter(|m| !m.generators.is_empty())
        .map(|_| relation_residuals.iter().all(|r| r.ok));
    let ok = class_size_failures.is_empty()
        && all_faces_paired
        && euler == 0
        && relations_abelian_ok
        && angles_ok != Some(false)
        && relations_metric_ok != Some(false);
    VerificationReport {
        class_sizes_ok: class_size_failures.is_empty(),
        class_size_failures,
        all_faces_paired,
        vertex_classes: v,
        edge_classes: e,
        face_pairs: f,
        euler,
        euler_ok: euler == 0,
        relations_abelian_ok,
        angle_sums,
        angles_ok,
        relation_residuals,
        relations_metric_ok,
        ok,
    }
}

pub fn presentation(result: &PairingResult) -> GroupPresentation {
    result.presentation.clone()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytope::cube;

    fn w(s: &str) -> GroupWord {
        GroupWord::parse(s).unwrap()
    }

    #[test]
    fn words_reduce_and_print() {
        assert_eq!(w("a a^-1 b").to_string(), "b");
        assert_eq!(w("a^3 b^-1 a^-1").to_string(), "a^3 b^-1 a^-1");
        assert_eq!(w("").to_string(), "1");
        assert_eq!(w("a b").inverse(), w("b^-1 a^-1"));
        assert!(w("a b").mul(&w("a b").inverse()).is_empty());
        assert_eq!(w("a^8 b^-7").exponent_sum("b"), -7);
        assert!(w("u v^2 u^-1 v^2").is_cyclic_conjugate(&w("v^2 u v^2 u^-1")));
        assert!(w("a b").is_cyclic_conjugate(&w("a^-1 b^-1")));
        assert!(!w("a b").is_cyclic_conjugate(&w("a b^-1")));
        assert!(GroupWord::parse("a^x").is_err());
        assert!(GroupWord::parse("3a").is_err());
    }

    #[test]
    fn consequence_of_conjugate() {
        let r = vec![1, 2, -1, -2];
        assert_eq!(
            consequence_search(&[2, -1, -2, 1], std::slice::from_ref(&r), 20, 1000),
            Some(vec![0])
        );
        assert_eq!(consequence_search(&[1, 1], &[r], 20, 1000), None);
    }

    #[test]
    fn consequence_needs_two_relators() {
        // a^2 = 1 and b^3 = 1 give a^2 b^3
        let rels = vec![vec![1, 1], vec![2, 2, 2]];
        let found = consequence_search(&[1, 1, 2, 2, 2], &rels, 20, 10_000).unwrap();
        assert_eq!(found.iter().collect::<BTreeSet<_>>().len(), 2);
    }

    fn torus_seeds() -> Vec<FacePairingSeed> {
        let s = |n: &str, a: &str, b: &str, se: [usize; 2], de: [usize; 2]| FacePairingSeed {
            name: n.into(),
            source: a.into(),
            target: b.into(),
            src_edge: se,
            dst_edge: de,
        };
        vec![
            s("x", "x0", "x1", [0, 4], [1, 5]),
            s("y", "y0", "y1", [0, 1], [2, 3]),
            s("z", "z0", "z1", [0, 2], [4, 6]),
        ]
    }

    #[test]
    fn three_torus() {
        let r = propagate(&cube(), &torus_seeds(), 4, &[], &PropagateOptions::default()).unwrap();
        assert_eq!(r.classes.len(), 3);
        assert!(r
            .classes
            .iter()
            .all(|c| c.size == 4 && c.outcome == ClassOutcome::Defining));
        assert_eq!(r.vertex_classes.len(), 1);
        assert_eq!(r.presentation.relators.len(), 3);
        for rel in &r.presentation.relators {
            for g in ["x", "y", "z"] {
                assert_eq!(rel.exponent_sum(g), 0);
            }
        }
    }

    #[test]
    fn wrong_multiplicity_is_a_contradiction() {
        let e = propagate(&cube(), &torus_seeds(), 3, &[], &PropagateOptions::default()).unwrap_err();
        match e {
            Error::Contradiction { message, trace } => {
                assert!(message.contains("length 4, declared 3"), "{message}");
                assert!(!trace.is_empty());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_seeds_rejected() {
        let mut s = torus_seeds();
        s[0].dst_edge = [5, 1];
        assert!(matches!(
            propagate(&cube(), &s, 4, &[], &PropagateOptions::default()),
            Err(Error::Fixture(_))
        ));
        let mut s = torus_seeds();
        s[1].target = "x1".into();
        assert!(propagate(&cube(), &s, 4, &[], &PropagateOptions::default()).is_err());
        let s = &torus_seeds()[..2];
        assert!(matches!(
            propagate(&cube(), s, 4, &[], &PropagateOptions::default()),
            Err(Error::Orphan { .. })
        ));
    }
}
