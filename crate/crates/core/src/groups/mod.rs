//! Group models that supply the test spaces: free groups, free-by-cyclic
//! extensions, and hyperbolic tilings, together with Cayley-ball generation,
//! subgroup distortion profiles, and twist-product length bounds.
//!
//! Words are always freely reduced; the free-by-cyclic normal form is the pair
//! (fiber word, t-exponent). Every enumeration is breadth-first with a fixed
//! generator order, so vertex numbering is deterministic.

pub mod tiling;
pub mod twist;

use std::collections::{BTreeSet, HashMap, VecDeque};

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::graph::MetricGraph;

const MAX_RANK: u8 = 26;
/// Hard stop for ball enumeration; the box this runs on has a few GB of memory.
const MAX_BALL_ELEMENTS: usize = 6_000_000;

/// Freely reduced word over generators `1..=rank` (negative = inverse).
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Word(Vec<i8>);

fn reduce_into(out: &mut Vec<i8>, letters: impl IntoIterator<Item = i8>) {
    for l in letters {
        debug_assert!(l != 0);
        if out.last() == Some(&-l) {
            out.pop();
        } else {
            out.push(l);
        }
    }
}

impl Word {
    pub fn identity() -> Self {
        Word(Vec::new())
    }

    pub fn generator(i: u8) -> Self {
        Word(vec![i as i8])
    }

    /// Builds a word, freely reducing as it goes.
    pub fn from_letters(letters: impl IntoIterator<Item = i8>) -> Self {
        let mut out = Vec::new();
        reduce_into(&mut out, letters);
        Word(out)
    }

    pub fn letters(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut out = self.0.clone();
        reduce_into(&mut out, other.0.iter().copied());
        Word(out)
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|&l| -l).collect())
    }

    /// Letters of `self^-1 · other` cancel along the common prefix, so the
    /// distance in the free group is `|u| + |v| - 2 lcp(u, v)`.
    pub fn tree_distance(&self, other: &Word) -> u32 {
        let lcp = self
            .0
            .iter()
            .zip(other.0.iter())
            .take_while(|(a, b)| a == b)
            .count();
        (self.0.len() + other.0.len() - 2 * lcp) as u32
    }

    pub fn max_letter(&self) -> u8 {
        self.0.iter().map(|l| l.unsigned_abs()).max().unwrap_or(0)
    }

    pub fn render(&self) -> String {
        if self.0.is_empty() {
            return "1".to_string();
        }
        self.0.iter().map(|&l| letter_char(l)).collect()
    }
}

pub fn letter_char(l: i8) -> char {
    debug_assert!(l != 0 && l.unsigned_abs() <= MAX_RANK);
    if l > 0 {
        (b'a' + (l as u8) - 1) as char
    } else {
        (b'A' + (-l as u8) - 1) as char
    }
}

/// Parses `"abA"` style words; `"1"` or `""` is the identity.
pub fn parse_word(s: &str) -> Result<Word> {
    let s = s.trim();
    if s.is_empty() || s == "1" {
        return Ok(Word::identity());
    }
    let mut letters = Vec::with_capacity(s.len());
    for ch in s.chars() {
        let l = match ch {
            'a'..='z' => (ch as u8 - b'a' + 1) as i8,
            'A'..='Z' => -((ch as u8 - b'A' + 1) as i8),
            _ => return Err(Error::Parse(format!("bad letter `{ch}` in word `{s}`"))),
        };
        letters.push(l);
    }
    Ok(Word::from_letters(letters))
}

/// A free-group automorphism given by generator images, stored together with
/// its verified inverse so negative powers are available.
#[derive(Clone, Debug)]
pub struct FreeAutomorphism {
    rank: u8,
    images: Vec<Word>,
    inverse_images: Vec<Word>,
}

impl FreeAutomorphism {
    /// Checks that the two image lists really are mutually inverse
    /// endomorphisms before accepting them.
    pub fn new(rank: u8, images: Vec<Word>, inverse_images: Vec<Word>) -> Result<Self> {
        if rank == 0 || rank > MAX_RANK {
            return Err(Error::Parse(format!("rank {rank} out of range 1..=26")));
        }
        if images.len() != rank as usize || inverse_images.len() != rank as usize {
            return Err(Error::Parse("one image per generator required".into()));
        }
        for w in images.iter().chain(&inverse_images) {
            if w.max_letter() > rank {
                return Err(Error::Parse(format!(
                    "image {} uses a generator beyond rank {rank}",
                    w.render()
                )));
            }
        }
        let auto = FreeAutomorphism { rank, images, inverse_images };
        for i in 1..=rank {
            let x = Word::generator(i);
            if auto.apply_with(&auto.inverse_images, &auto.apply(&x)) != x
                || auto.apply_with(&auto.images, &auto.apply_inverse(&x)) != x
            {
                return Err(Error::PreconditionViolated(format!(
                    "images and inverse images are not mutually inverse at generator {}",
                    x.render()
                )));
            }
        }
        Ok(auto)
    }

    /// Builds from images alone by searching for inverse images among words of
    /// length at most `max_len` (breadth-first, deterministic).
    pub fn from_images(rank: u8, images: Vec<Word>, max_len: usize) -> Result<Self> {
        if rank == 0 || rank > MAX_RANK {
            return Err(Error::Parse(format!("rank {rank} out of range 1..=26")));
        }
        if images.len() != rank as usize {
            return Err(Error::Parse("one image per generator required".into()));
        }
        let probe = FreeAutomorphism {
            rank,
            images: images.clone(),
            inverse_images: (1..=rank).map(Word::generator).collect(),
        };
        let mut found: Vec<Option<Word>> = vec![None; rank as usize];
        let mut queue = VecDeque::from([Word::identity()]);
        while let Some(w) = queue.pop_front() {
            if w.len() >= max_len {
                continue;
            }
            for l in letter_order(rank) {
                if w.letters().last() == Some(&-l) {
                    continue;
                }
                let mut next = w.clone();
                next.0.push(l);
                let image = probe.apply(&next);
                if image.len() == 1 && image.letters()[0] > 0 {
                    let slot = &mut found[(image.letters()[0] - 1) as usize];
                    if slot.is_none() {
                        *slot = Some(next.clone());
                    }
                }
                queue.push_back(next);
            }
            if found.iter().all(|f| f.is_some()) {
                break;
            }
        }
        let inverse_images: Vec<Word> = found
            .into_iter()
            .enumerate()
            .map(|(i, f)| {
                f.ok_or_else(|| {
                    Error::PreconditionViolated(format!(
                        "no inverse image of generator {} within length {max_len}; not an automorphism or images too long",
                        letter_char(i as i8 + 1)
                    ))
                })
            })
            .collect::<Result<_>>()?;
        Self::new(rank, images, inverse_images)
    }

    /// Parses `"a->ab,b->a"` image lists.
    pub fn parse(rank: u8, spec: &str, max_len: usize) -> Result<Self> {
        let mut images = vec![None; rank as usize];
        for part in spec.split(',') {
            let (lhs, rhs) = part
                .split_once("->")
                .ok_or_else(|| Error::Parse(format!("expected `x->word` in `{part}`")))?;
            let lhs = parse_word(lhs)?;
            if lhs.len() != 1 || lhs.letters()[0] <= 0 {
                return Err(Error::Parse(format!("left side of `{part}` must be a generator")));
            }
            let idx = (lhs.letters()[0] - 1) as usize;
            if idx >= rank as usize {
                return Err(Error::Parse(format!("generator {} beyond rank {rank}", lhs.render())));
            }
            if images[idx].is_some() {
                return Err(Error::Parse(format!("duplicate image for {}", lhs.render())));
            }
            images[idx] = Some(parse_word(rhs)?);
        }
        let images: Vec<Word> = images
            .into_iter()
            .enumerate()
            .map(|(i, im)| {
                im.ok_or_else(|| {
                    Error::Parse(format!("missing image for generator {}", letter_char(i as i8 + 1)))
                })
            })
            .collect::<Result<_>>()?;
        Self::from_images(rank, images, max_len)
    }

    pub fn rank(&self) -> u8 {
        self.rank
    }

    pub fn images(&self) -> &[Word] {
        &self.images
    }

    fn apply_with(&self, images: &[Word], w: &Word) -> Word {
        let mut out = Vec::new();
        for &l in w.letters() {
            let img = &images[(l.unsigned_abs() - 1) as usize];
            if l > 0 {
                reduce_into(&mut out, img.0.iter().copied());
            } else {
                reduce_into(&mut out, img.0.iter().rev().map(|&x| -x));
            }
        }
        Word(out)
    }

    pub fn apply(&self, w: &Word) -> Word {
        self.apply_with(&self.images, w)
    }

    pub fn apply_inverse(&self, w: &Word) -> Word {
        self.apply_with(&self.inverse_images, w)
    }

    /// `phi^k(w)` for any integer `k`.
    pub fn apply_power(&self, k: i64, w: &Word) -> Word {
        let mut out = w.clone();
        if k >= 0 {
            for _ in 0..k {
                out = self.apply(&out);
            }
        } else {
            for _ in 0..(-k) {
                out = self.apply_inverse(&out);
            }
        }
        out
    }
}

fn letter_order(rank: u8) -> impl Iterator<Item = i8> {
    (1..=rank as i8).flat_map(|i| [i, -i])
}

/// Group element in normal form: reduced fiber word plus t-exponent.
/// Plain free-group elements keep `t = 0`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Elem {
    pub word: Word,
    pub t: i64,
}

impl Elem {
    pub fn identity() -> Self {
        Elem { word: Word::identity(), t: 0 }
    }
}

/// The models the command line and the instance files can name.
#[derive(Clone, Debug)]
pub enum GroupModel {
    Free { rank: u8 },
    FreeByCyclic { rank: u8, auto: FreeAutomorphism },
    SurfaceTiling { p: u32, q: u32 },
}

impl GroupModel {
    /// Parses model strings: `free:2`, `fbc:2:a->ab,b->a`, `tiling:7:3`.
    pub fn parse(s: &str) -> Result<Self> {
        let mut parts = s.splitn(2, ':');
        let kind = parts.next().unwrap_or("");
        let rest = parts.next().unwrap_or("");
        match kind {
            "free" => {
                let rank: u8 =
                    rest.parse().map_err(|_| Error::Parse(format!("bad rank in `{s}`")))?;
                if rank == 0 || rank > MAX_RANK {
                    return Err(Error::Parse(format!("rank {rank} out of range 1..=26")));
                }
                Ok(GroupModel::Free { rank })
            }
            "fbc" => {
                let (rank_s, map_s) = rest
                    .split_once(':')
                    .ok_or_else(|| Error::Parse(format!("expected `fbc:RANK:MAP` in `{s}`")))?;
                let rank: u8 =
                    rank_s.parse().map_err(|_| Error::Parse(format!("bad rank in `{s}`")))?;
                let auto = FreeAutomorphism::parse(rank, map_s, 8)?;
                Ok(GroupModel::FreeByCyclic { rank, auto })
            }
            "tiling" => {
                let (p_s, q_s) = rest
                    .split_once(':')
                    .ok_or_else(|| Error::Parse(format!("expected `tiling:P:Q` in `{s}`")))?;
                let p: u32 = p_s.parse().map_err(|_| Error::Parse(format!("bad p in `{s}`")))?;
                let q: u32 = q_s.parse().map_err(|_| Error::Parse(format!("bad q in `{s}`")))?;
                Ok(GroupModel::SurfaceTiling { p, q })
            }
            _ => Err(Error::Parse(format!("unknown model `{s}`: expected free:/fbc:/tiling:"))),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            GroupModel::Free { rank } => format!("free:{rank}"),
            GroupModel::FreeByCyclic { rank, auto } => {
                let imgs: Vec<String> = auto
                    .images()
                    .iter()
                    .enumerate()
                    .map(|(i, w)| format!("{}->{}", letter_char(i as i8 + 1), w.render()))
                    .collect();
                format!("fbc:{rank}:{}", imgs.join(","))
            }
            GroupModel::SurfaceTiling { p, q } => format!("tiling:{p}:{q}"),
        }
    }

    fn rank(&self) -> u8 {
        match self {
            GroupModel::Free { rank } => *rank,
            GroupModel::FreeByCyclic { rank, .. } => *rank,
            GroupModel::SurfaceTiling { .. } => 0,
        }
    }

    /// Canonical label: fiber word, then `t`/`T` letters for the exponent.
    pub fn label(&self, e: &Elem) -> String {
        if e.word.is_empty() && e.t == 0 {
            return "1".to_string();
        }
        let mut s = if e.word.is_empty() { String::new() } else { e.word.render() };
        let tc = if e.t > 0 { 't' } else { 'T' };
        for _ in 0..e.t.unsigned_abs() {
            s.push(tc);
        }
        s
    }

    /// Right multiplication in normal form.
    pub fn multiply(&self, a: &Elem, b: &Elem) -> Result<Elem> {
        match self {
            GroupModel::Free { .. } => {
                if a.t != 0 || b.t != 0 {
                    return Err(Error::PreconditionViolated(
                        "free model elements carry no t-exponent".into(),
                    ));
                }
                Ok(Elem { word: a.word.concat(&b.word), t: 0 })
            }
            GroupModel::FreeByCyclic { auto, .. } => {
                let shifted = auto.apply_power(a.t, &b.word);
                Ok(Elem { word: a.word.concat(&shifted), t: a.t + b.t })
            }
            GroupModel::SurfaceTiling { .. } => Err(Error::PreconditionViolated(
                "tiling models have no word arithmetic".into(),
            )),
        }
    }

    pub fn inverse(&self, a: &Elem) -> Result<Elem> {
        match self {
            GroupModel::Free { .. } => Ok(Elem { word: a.word.inverse(), t: 0 }),
            GroupModel::FreeByCyclic { auto, .. } => {
                Ok(Elem { word: auto.apply_power(-a.t, &a.word.inverse()), t: -a.t })
            }
            GroupModel::SurfaceTiling { .. } => Err(Error::PreconditionViolated(
                "tiling models have no word arithmetic".into(),
            )),
        }
    }

    /// Generator steps in the fixed enumeration order.
    fn steps(&self) -> Vec<Elem> {
        let mut out: Vec<Elem> = letter_order(self.rank())
            .map(|l| Elem { word: Word::from_letters([l]), t: 0 })
            .collect();
        if matches!(self, GroupModel::FreeByCyclic { .. }) {
            out.push(Elem { word: Word::identity(), t: 1 });
            out.push(Elem { word: Word::identity(), t: -1 });
        }
        out
    }
}

/// A Cayley ball together with the enumeration that produced it.
#[derive(Clone, Debug)]
pub struct BallEnumeration {
    pub graph: MetricGraph,
    /// Word-metric distance from the identity, per vertex.
    pub dist: Vec<u32>,
    /// Normal forms per vertex; empty for tiling models.
    pub elems: Vec<Elem>,
}

/// Breadth-first Cayley ball of `radius` around the identity with canonical
/// labels. Edges join elements differing by one generator; both endpoints
/// must lie in the ball.
pub fn cayley_ball(model: &GroupModel, radius: u32) -> Result<BallEnumeration> {
    if let GroupModel::SurfaceTiling { p, q } = model {
        let graph = tiling::tiling_ball(*p, *q, radius, None)?;
        let dist = graph.bfs_distances(0)?;
        return Ok(BallEnumeration { graph, dist, elems: Vec::new() });
    }
    let steps = model.steps();
    let mut ids: HashMap<Elem, u32> = HashMap::new();
    let mut elems: Vec<Elem> = Vec::new();
    let mut dist: Vec<u32> = Vec::new();
    let mut edges: BTreeSet<(u32, u32)> = BTreeSet::new();
    let identity = Elem::identity();
    ids.insert(identity.clone(), 0);
    elems.push(identity);
    dist.push(0);
    let mut head = 0usize;
    while head < elems.len() {
        let (cur, d) = (elems[head].clone(), dist[head]);
        let cur_id = head as u32;
        head += 1;
        for step in &steps {
            let next = model.multiply(&cur, step)?;
            // normal-form sanity: reduction must be idempotent
            let re = Word::from_letters(next.word.letters().iter().copied());
            if re != next.word {
                return Err(Error::NormalFormFailure(model.label(&next)));
            }
            if let Some(&id) = ids.get(&next) {
                let (a, b) = (cur_id.min(id), cur_id.max(id));
                if a != b {
                    edges.insert((a, b));
                }
            } else if d < radius {
                let id = elems.len() as u32;
                if elems.len() >= MAX_BALL_ELEMENTS {
                    return Err(Error::GraphTooLarge {
                        vertices: elems.len(),
                        cap: MAX_BALL_ELEMENTS,
                    });
                }
                ids.insert(next.clone(), id);
                elems.push(next);
                dist.push(d + 1);
                edges.insert((cur_id, id));
            }
        }
    }
    let labels: Vec<String> = elems.iter().map(|e| model.label(e)).collect();
    let edge_list: Vec<(u32, u32)> = edges.into_iter().collect();
    let graph = MetricGraph::from_edges(elems.len(), &edge_list)?.with_labels(labels)?;
    Ok(BallEnumeration { graph, dist, elems })
}

/// Subgroups the distortion profile understands.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SubgroupSpec {
    /// The whole group (distortion is 1 up to ball-boundary effects).
    WholeGroup,
    /// The fiber `F_rank x {0}` of a free-by-cyclic model.
    FbcFiber,
    /// The free factor generated by the first `rank` letters of a free model.
    FreeFactor { rank: u8 },
}

impl SubgroupSpec {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "whole" => Ok(SubgroupSpec::WholeGroup),
            "fiber" => Ok(SubgroupSpec::FbcFiber),
            _ => {
                if let Some(r) = s.strip_prefix("factor:") {
                    let rank: u8 =
                        r.parse().map_err(|_| Error::Parse(format!("bad factor rank `{r}`")))?;
                    Ok(SubgroupSpec::FreeFactor { rank })
                } else {
                    Err(Error::Parse(format!("unknown subgroup `{s}`: whole|fiber|factor:R")))
                }
            }
        }
    }

    pub fn describe(&self) -> String {
        match self {
            SubgroupSpec::WholeGroup => "whole".into(),
            SubgroupSpec::FbcFiber => "fiber".into(),
            SubgroupSpec::FreeFactor { rank } => format!("factor:{rank}"),
        }
    }

    pub fn is_member(&self, e: &Elem) -> bool {
        match self {
            SubgroupSpec::WholeGroup => true,
            SubgroupSpec::FbcFiber => e.t == 0,
            SubgroupSpec::FreeFactor { rank } => e.t == 0 && e.word.max_letter() <= *rank,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistortionRow {
    pub radius: u32,
    pub diameter: u32,
    pub disto: Ratio<i64>,
    /// Pair of subgroup elements realising the diameter (canonical labels).
    pub witness: (String, String),
}

#[derive(Clone, Debug)]
pub struct DistortionTable {
    pub model: String,
    pub subgroup: String,
    pub rows: Vec<DistortionRow>,
}

impl DistortionTable {
    /// `R,diam,disto_num,disto_den` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("R,diam,disto_num,disto_den\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                r.radius,
                r.diameter,
                r.disto.numer(),
                r.disto.denom()
            ));
        }
        out
    }
}

/// Diameter of a finite subset of a tree metric by the two-sweep method:
/// the farthest point from any start lies on a diametral pair.
fn tree_set_diameter(words: &[Word]) -> (u32, usize, usize) {
    assert!(!words.is_empty());
    let farthest = |from: usize| {
        let mut best = (0u32, from);
        for (i, w) in words.iter().enumerate() {
            let d = words[from].tree_distance(w);
            if d > best.0 {
                best = (d, i);
            }
        }
        best
    };
    let (_, u) = farthest(0);
    let (d, v) = farthest(u);
    (d, u.min(v), u.max(v))
}

/// Distortion profile: for each radius `R`, the intrinsic subgroup diameter of
/// the subgroup trace in the ambient `R`-ball, and `disto(R) = diam / R`.
///
/// The trace is honest: elements are enumerated in the ambient word metric and
/// filtered by membership, except for free factors of free groups, which are
/// isometrically embedded (reduced length over the sub-alphabet equals ambient
/// length), so the trace is enumerated directly on the subgroup side. Tests
/// cross-check that shortcut against the full enumeration at small radius.
pub fn distortion_profile(
    model: &GroupModel,
    subgroup: SubgroupSpec,
    radii: &[u32],
) -> Result<DistortionTable> {
    if radii.is_empty() {
        return Err(Error::EmptySet);
    }
    for w in radii.windows(2) {
        if w[0] >= w[1] {
            return Err(Error::OutOfOrder(w[0] as usize, w[1] as usize));
        }
    }
    if radii[0] == 0 {
        return Err(Error::PreconditionViolated("radii must be >= 1".into()));
    }
    let max_r = *radii.last().unwrap();
    match (model, subgroup) {
        (GroupModel::SurfaceTiling { .. }, _) => Err(Error::PreconditionViolated(
            "distortion profiles need a word model (free/fbc)".into(),
        )),
        (GroupModel::Free { rank }, SubgroupSpec::FreeFactor { rank: r }) => {
            if r == 0 || r > *rank {
                return Err(Error::Parse(format!("factor rank {r} out of range 1..={rank}")));
            }
            // isometric embedding: trace of the R-ball = own R-ball
            let sub = GroupModel::Free { rank: r };
            let ball = cayley_ball(&sub, max_r)?;
            rows_from_sets(model, subgroup, radii, |rad| {
                ball.elems
                    .iter()
                    .zip(&ball.dist)
                    .filter(|(_, d)| **d <= rad)
                    .map(|(e, _)| e.word.clone())
                    .collect()
            })
        }
        (GroupModel::FreeByCyclic { .. }, SubgroupSpec::FbcFiber) => {
            let ball = cayley_ball(model, max_r)?;
            rows_from_sets(model, subgroup, radii, |rad| {
                ball.elems
                    .iter()
                    .zip(&ball.dist)
                    .filter(|(e, d)| **d <= rad && subgroup.is_member(e))
                    .map(|(e, _)| e.word.clone())
                    .collect()
            })
        }
        (GroupModel::Free { .. }, SubgroupSpec::WholeGroup) => {
            let ball = cayley_ball(model, max_r)?;
            rows_from_sets(model, subgroup, radii, |rad| {
                ball.elems
                    .iter()
                    .zip(&ball.dist)
                    .filter(|(_, d)| **d <= rad)
                    .map(|(e, _)| e.word.clone())
                    .collect()
            })
        }
        (GroupModel::FreeByCyclic { .. }, SubgroupSpec::WholeGroup) => {
            // intrinsic = ambient; need distances up to 2R, so enumerate B(2R)
            let big = cayley_ball(model, 2 * max_r)?;
            let index: HashMap<&Elem, u32> =
                big.elems.iter().zip(0u32..).map(|(e, i)| (e, i)).collect();
            let mut rows = Vec::new();
            for &rad in radii {
                let members: Vec<&Elem> = big
                    .elems
                    .iter()
                    .zip(&big.dist)
                    .filter(|(_, d)| **d <= rad)
                    .map(|(e, _)| e)
                    .collect();
                if members.is_empty() {
                    return Err(Error::SubgroupBallEmpty(rad));
                }
                if members.len() > 20_000 {
                    return Err(Error::GraphTooLarge { vertices: members.len(), cap: 20_000 });
                }
                let mut best = (0u32, 0usize, 0usize);
                for i in 0..members.len() {
                    for j in (i + 1)..members.len() {
                        let diff = model.multiply(&model.inverse(members[i])?, members[j])?;
                        let d = *index.get(&diff).ok_or_else(|| {
                            Error::PreconditionViolated(
                                "difference escaped the 2R ball".into(),
                            )
                        })?;
                        let d = big.dist[d as usize];
                        if d > best.0 {
                            best = (d, i, j);
                        }
                    }
                }
                rows.push(DistortionRow {
                    radius: rad,
                    diameter: best.0,
                    disto: Ratio::new(i64::from(best.0), i64::from(rad)),
                    witness: (model.label(members[best.1]), model.label(members[best.2])),
                });
            }
            Ok(DistortionTable {
                model: model.describe(),
                subgroup: subgroup.describe(),
                rows,
            })
        }
        (GroupModel::Free { .. }, SubgroupSpec::FbcFiber) => Err(Error::PreconditionViolated(
            "fiber subgroup needs a free-by-cyclic model".into(),
        )),
        (GroupModel::FreeByCyclic { .. }, SubgroupSpec::FreeFactor { .. }) => {
            Err(Error::PreconditionViolated(
                "free-factor subgroup needs a plain free model".into(),
            ))
        }
    }
}

fn rows_from_sets(
    model: &GroupModel,
    subgroup: SubgroupSpec,
    radii: &[u32],
    set_at: impl Fn(u32) -> Vec<Word>,
) -> Result<DistortionTable> {
    let mut rows = Vec::new();
    for &rad in radii {
        let words = set_at(rad);
        if words.is_empty() {
            return Err(Error::SubgroupBallEmpty(rad));
        }
        let (diam, i, j) = tree_set_diameter(&words);
        rows.push(DistortionRow {
            radius: rad,
            diameter: diam,
            disto: Ratio::new(i64::from(diam), i64::from(rad)),
            witness: (
                model.label(&Elem { word: words[i].clone(), t: 0 }),
                model.label(&Elem { word: words[j].clone(), t: 0 }),
            ),
        });
    }
    Ok(DistortionTable { model: model.describe(), subgroup: subgroup.describe(), rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Diagnostic: prints ball sizes for the models the distortion profiles
    /// enumerate. Expensive; run with `cargo test -- --ignored --nocapture`.
    #[test]
    #[ignore]
    fn measure_ball_growth() {
        for spec in ["free:2", "fbc:2:a->a,b->b", "fbc:2:a->ab,b->a"] {
            let model = GroupModel::parse(spec).unwrap();
            for r in [4u32, 6, 8, 10] {
                let ball = cayley_ball(&model, r).unwrap();
                let fiber: Vec<&Elem> = ball.elems.iter().filter(|e| e.t == 0).collect();
                let longest = fiber.iter().map(|e| e.word.len()).max().unwrap_or(0);
                println!(
                    "{spec} radius {r}: {} elements, {} fiber, longest fiber word {longest}",
                    ball.elems.len(),
                    fiber.len()
                );
            }
        }
    }

    #[test]
    fn words_reduce_and_compose() {
        let w = parse_word("abBA").unwrap();
        assert!(w.is_empty());
        let u = parse_word("ab").unwrap();
        let v = parse_word("Ba").unwrap();
        assert_eq!(u.concat(&v).render(), "aa");
        assert_eq!(u.inverse().render(), "BA");
        assert_eq!(u.concat(&u.inverse()), Word::identity());
        assert_eq!(parse_word("1").unwrap(), Word::identity());
    }

    #[test]
    fn tree_distance_matches_reduced_length() {
        let u = parse_word("abA").unwrap();
        let v = parse_word("abb").unwrap();
        // u^-1 v = aB A^-1? compute directly:
        let direct = u.inverse().concat(&v).len() as u32;
        assert_eq!(u.tree_distance(&v), direct);
        assert_eq!(u.tree_distance(&u), 0);
    }

    #[test]
    fn automorphism_round_trip() {
        let auto = FreeAutomorphism::parse(2, "a->ab,b->a", 8).unwrap();
        let w = parse_word("aBa").unwrap();
        assert_eq!(auto.apply_inverse(&auto.apply(&w)), w);
        assert_eq!(auto.apply(&parse_word("aa").unwrap()).render(), "abab");
        // known inverse: a -> b, b -> Ba
        assert_eq!(auto.apply_inverse(&Word::generator(1)).render(), "b");
        assert_eq!(auto.apply_inverse(&Word::generator(2)).render(), "Ba");
        // negative powers really are powers of the inverse
        let w2 = auto.apply_power(-2, &w);
        assert_eq!(auto.apply_power(2, &w2), w);
    }

    #[test]
    fn non_automorphism_is_rejected() {
        // a -> aa is injective but not onto; no inverse image of a exists
        let err = FreeAutomorphism::parse(1, "a->aa", 6).unwrap_err();
        assert!(matches!(err, Error::PreconditionViolated(_)));
    }

    #[test]
    fn free_ball_counts_match_the_closed_form() {
        // |B(r)| in F2 is 2 * 3^r - 1
        let model = GroupModel::parse("free:2").unwrap();
        for (r, expect) in [(1u32, 5usize), (2, 17), (3, 53)] {
            let ball = cayley_ball(&model, r).unwrap();
            assert_eq!(ball.graph.vertex_count(), expect, "radius {r}");
            // a tree: edges = vertices - 1
            assert_eq!(ball.graph.edge_count(), expect - 1);
            assert_eq!(ball.graph.delta_four_point(None).unwrap().delta.twice(), 0);
        }
        let b1 = cayley_ball(&model, 1).unwrap();
        assert_eq!(b1.graph.labels().unwrap(), &["1", "a", "A", "b", "B"]);
        assert_eq!(b1.dist, vec![0, 1, 1, 1, 1]);
    }

    #[test]
    fn fbc_ball_basics() {
        let model = GroupModel::parse("fbc:2:a->ab,b->a").unwrap();
        let ball = cayley_ball(&model, 2).unwrap();
        // radius 1: identity + a, A, b, B, t, T
        assert!(ball.graph.vertex_count() > 7);
        assert_eq!(ball.dist[0], 0);
        // t a T = phi(a) = ab has length 3 in the ball but is one conjugation away
        let lab = ball.graph.labels().unwrap();
        assert!(lab.contains(&"t".to_string()) && lab.contains(&"T".to_string()));
        // normal form multiplication: (1,t) * (a,0) = (phi(a), t)
        let t = Elem { word: Word::identity(), t: 1 };
        let a = Elem { word: Word::generator(1), t: 0 };
        let ta = model.multiply(&t, &a).unwrap();
        assert_eq!(ta.word.render(), "ab");
        assert_eq!(ta.t, 1);
        // inverse law
        let inv = model.inverse(&ta).unwrap();
        assert_eq!(model.multiply(&ta, &inv).unwrap(), Elem::identity());
    }

    #[test]
    fn whole_group_distortion_is_flat() {
        let model = GroupModel::parse("free:2").unwrap();
        let table =
            distortion_profile(&model, SubgroupSpec::WholeGroup, &[1, 2, 3, 4]).unwrap();
        for row in &table.rows {
            assert_eq!(row.diameter, 2 * row.radius);
            assert_eq!(row.disto, Ratio::new(2, 1));
        }
    }

    #[test]
    fn free_factor_distortion_matches_honest_enumeration() {
        let model = GroupModel::parse("free:3").unwrap();
        let fast =
            distortion_profile(&model, SubgroupSpec::FreeFactor { rank: 2 }, &[1, 2, 3, 4])
                .unwrap();
        // honest route: enumerate the ambient ball and filter membership
        let ball = cayley_ball(&model, 4).unwrap();
        for row in &fast.rows {
            let words: Vec<Word> = ball
                .elems
                .iter()
                .zip(&ball.dist)
                .filter(|(e, d)| {
                    **d <= row.radius && SubgroupSpec::FreeFactor { rank: 2 }.is_member(e)
                })
                .map(|(e, _)| e.word.clone())
                .collect();
            // same subgroup trace
            let (diam, _, _) = tree_set_diameter(&words);
            assert_eq!(diam, row.diameter);
        }
    }

    #[test]
    fn tree_diameter_agrees_with_pairwise_scan() {
        let model = GroupModel::parse("fbc:2:a->ab,b->a").unwrap();
        let ball = cayley_ball(&model, 4).unwrap();
        let words: Vec<Word> = ball
            .elems
            .iter()
            .zip(&ball.dist)
            .filter(|(e, d)| **d <= 4 && e.t == 0)
            .map(|(e, _)| e.word.clone())
            .collect();
        let (diam, _, _) = tree_set_diameter(&words);
        let mut brute = 0;
        for i in 0..words.len() {
            for j in (i + 1)..words.len() {
                brute = brute.max(words[i].tree_distance(&words[j]));
            }
        }
        assert_eq!(diam, brute);
    }

    #[test]
    fn distortion_input_validation() {
        let model = GroupModel::parse("free:2").unwrap();
        assert!(matches!(
            distortion_profile(&model, SubgroupSpec::WholeGroup, &[]),
            Err(Error::EmptySet)
        ));
        assert!(matches!(
            distortion_profile(&model, SubgroupSpec::WholeGroup, &[3, 2]),
            Err(Error::OutOfOrder(3, 2))
        ));
        assert!(matches!(
            distortion_profile(&model, SubgroupSpec::FbcFiber, &[2]),
            Err(Error::PreconditionViolated(_))
        ));
    }

    #[test]
    fn model_strings_round_trip() {
        for s in ["free:2", "fbc:2:a->ab,b->a", "tiling:7:3"] {
            let m = GroupModel::parse(s).unwrap();
            assert_eq!(m.describe(), s);
        }
        assert!(GroupModel::parse("ring:4").is_err());
        assert!(SubgroupSpec::parse("factor:2").is_ok());
        assert!(SubgroupSpec::parse("nope").is_err());
    }
}
