//! Functional dependencies, implication and minimal covers.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::attrs::{AttrId, AttrSet};
use crate::error::{Error, Result};
use crate::partition::build_partition;
use crate::relation::Instance;

/// A dependency `lhs → rhs` with a single attribute on the right.
///
/// Ordered by rhs ordinal, then lhs size, then lhs ordinals.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct FunctionalDependency {
    pub lhs: AttrSet,
    pub rhs: AttrId,
}

impl FunctionalDependency {
    /// Panics if `rhs ∈ lhs`; trivial dependencies are never represented.
    pub fn new(lhs: AttrSet, rhs: AttrId) -> Self {
        assert!(!lhs.contains(rhs), "trivial dependency");
        FunctionalDependency { lhs, rhs }
    }

    pub fn attrs(&self) -> AttrSet {
        self.lhs.with(self.rhs)
    }

    pub fn shifted(&self, offset: usize) -> Self {
        FunctionalDependency {
            lhs: self.lhs.shifted(offset),
            rhs: AttrId::new(self.rhs.index() + offset),
        }
    }

    pub fn unshifted(&self, offset: usize) -> Self {
        FunctionalDependency {
            lhs: self.lhs.unshifted(offset),
            rhs: AttrId::new(self.rhs.index() - offset),
        }
    }

    pub fn display<'a, S: AsRef<str>>(&'a self, names: &'a [S]) -> FdDisplay<'a, S> {
        FdDisplay { fd: self, names }
    }
}

impl Ord for FunctionalDependency {
    fn cmp(&self, other: &Self) -> Ordering {
        self.rhs
            .cmp(&other.rhs)
            .then_with(|| self.lhs.cmp(&other.lhs))
    }
}

impl PartialOrd for FunctionalDependency {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub struct FdDisplay<'a, S> {
    fd: &'a FunctionalDependency,
    names: &'a [S],
}

impl<S: AsRef<str>> fmt::Display for FdDisplay<'_, S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lhs: Vec<&str> = self
            .fd
            .lhs
            .iter()
            .map(|a| self.names[a.index()].as_ref())
            .collect();
        write!(
            f,
            "{} -> {}",
            lhs.join(","),
            self.names[self.fd.rhs.index()].as_ref()
        )
    }
}

/// True iff no two rows agree on the lhs and differ on the rhs.
pub fn holds(instance: &Instance, fd: &FunctionalDependency) -> Result<bool> {
    instance.check_attrs(fd.attrs())?;
    Ok(build_partition(instance, fd.lhs)?.refines(instance, fd.rhs))
}

/// An approximate dependency with its g3 error and absolute violation count.
#[derive(Clone, Debug, PartialEq)]
pub struct Afd {
    pub fd: FunctionalDependency,
    pub error: f64,
    pub degree: usize,
}

/// Which pipeline stage contributed a dependency.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Origin {
    PreservedLeft,
    PreservedRight,
    UpstagedLeft,
    UpstagedRight,
    Inferred,
    Refined,
    Mined,
    Sampled,
}

impl Origin {
    pub const ALL: [Origin; 8] = [
        Origin::PreservedLeft,
        Origin::PreservedRight,
        Origin::UpstagedLeft,
        Origin::UpstagedRight,
        Origin::Inferred,
        Origin::Refined,
        Origin::Mined,
        Origin::Sampled,
    ];

    /// Lower ranks belong to earlier stages and win on conflicts.
    pub fn rank(self) -> u8 {
        match self {
            Origin::PreservedLeft | Origin::PreservedRight => 0,
            Origin::UpstagedLeft | Origin::UpstagedRight => 1,
            Origin::Inferred | Origin::Refined => 2,
            Origin::Mined | Origin::Sampled => 3,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Origin::PreservedLeft => "preserved-left",
            Origin::PreservedRight => "preserved-right",
            Origin::UpstagedLeft => "upstaged-left",
            Origin::UpstagedRight => "upstaged-right",
            Origin::Inferred => "inferred",
            Origin::Refined => "refined",
            Origin::Mined => "mined",
            Origin::Sampled => "sampled",
        }
    }

    /// The same stage viewed from the other side of the join.
    pub fn mirrored(self) -> Origin {
        match self {
            Origin::PreservedLeft => Origin::PreservedRight,
            Origin::PreservedRight => Origin::PreservedLeft,
            Origin::UpstagedLeft => Origin::UpstagedRight,
            Origin::UpstagedRight => Origin::UpstagedLeft,
            o => o,
        }
    }
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

fn better(a: Option<Origin>, b: Option<Origin>) -> Option<Origin> {
    match (a, b) {
        (Some(x), Some(y)) => Some(if y.rank() < x.rank() { y } else { x }),
        (x, None) => x,
        (None, y) => y,
    }
}

/// A set of dependencies in canonical order, each optionally tagged with the
/// stage that produced it.
#[derive(Clone, Default, PartialEq, Eq, Debug)]
pub struct FdSet {
    fds: BTreeMap<FunctionalDependency, Option<Origin>>,
}

impl FdSet {
    pub fn new() -> Self {
        FdSet::default()
    }

    pub fn tagged(fds: impl IntoIterator<Item = FunctionalDependency>, origin: Origin) -> Self {
        let mut s = FdSet::new();
        for fd in fds {
            s.insert_tagged(fd, Some(origin));
        }
        s
    }

    pub fn len(&self) -> usize {
        self.fds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fds.is_empty()
    }

    /// Adds an untagged dependency. Returns false if it was already present.
    pub fn insert(&mut self, fd: FunctionalDependency) -> bool {
        self.insert_tagged(fd, None)
    }

    /// Adds a dependency; on duplicates the earlier-stage origin is kept.
    pub fn insert_tagged(&mut self, fd: FunctionalDependency, origin: Option<Origin>) -> bool {
        match self.fds.get_mut(&fd) {
            Some(slot) => {
                *slot = better(*slot, origin);
                false
            }
            None => {
                self.fds.insert(fd, origin);
                true
            }
        }
    }

    pub fn remove(&mut self, fd: &FunctionalDependency) -> bool {
        self.fds.remove(fd).is_some()
    }

    pub fn contains(&self, fd: &FunctionalDependency) -> bool {
        self.fds.contains_key(fd)
    }

    pub fn origin(&self, fd: &FunctionalDependency) -> Option<Origin> {
        self.fds.get(fd).copied().flatten()
    }

    pub fn iter(&self) -> impl Iterator<Item = &FunctionalDependency> + '_ {
        self.fds.keys()
    }

    pub fn iter_tagged(&self) -> impl Iterator<Item = (&FunctionalDependency, Option<Origin>)> + '_ {
        self.fds.iter().map(|(fd, o)| (fd, *o))
    }

    pub fn to_vec(&self) -> Vec<FunctionalDependency> {
        self.fds.keys().copied().collect()
    }

    pub fn extend(&mut self, other: &FdSet) {
        for (fd, o) in other.iter_tagged() {
            self.insert_tagged(*fd, o);
        }
    }

    pub fn union(&self, other: &FdSet) -> FdSet {
        let mut out = self.clone();
        out.extend(other);
        out
    }

    /// Overwrites every origin.
    pub fn retagged(&self, origin: Option<Origin>) -> FdSet {
        FdSet {
            fds: self.fds.keys().map(|fd| (*fd, origin)).collect(),
        }
    }

    pub fn filter(&self, mut keep: impl FnMut(&FunctionalDependency) -> bool) -> FdSet {
        FdSet {
            fds: self
                .fds
                .iter()
                .filter(|(fd, _)| keep(fd))
                .map(|(fd, o)| (*fd, *o))
                .collect(),
        }
    }

    pub fn map(&self, mut f: impl FnMut(&FunctionalDependency) -> FunctionalDependency) -> FdSet {
        let mut out = FdSet::new();
        for (fd, o) in self.iter_tagged() {
            out.insert_tagged(f(fd), o);
        }
        out
    }

    pub fn shifted(&self, offset: usize) -> FdSet {
        self.map(|fd| fd.shifted(offset))
    }

    /// Members whose attributes all lie within `attrs`.
    pub fn within(&self, attrs: AttrSet) -> FdSet {
        self.filter(|fd| fd.attrs().is_subset(attrs))
    }

    /// Attribute closure of `attrs` under this set.
    pub fn closure(&self, attrs: AttrSet) -> AttrSet {
        closure_of(self.fds.keys(), attrs)
    }

    /// Logical implication by attribute closure.
    pub fn implies(&self, fd: &FunctionalDependency) -> bool {
        self.closure(fd.lhs).contains(fd.rhs)
    }

    pub fn implies_all(&self, other: &FdSet) -> bool {
        other.iter().all(|fd| self.implies(fd))
    }

    /// Both sets have the same logical closure.
    pub fn closure_equal(&self, other: &FdSet) -> bool {
        self.implies_all(other) && other.implies_all(self)
    }

    /// An irredundant, left-reduced subset-equivalent cover. Origins follow
    /// the dependencies they were reduced from.
    pub fn minimal_cover(&self) -> FdSet {
        let mut work: Vec<(FunctionalDependency, Option<Origin>)> =
            self.fds.iter().map(|(fd, o)| (*fd, *o)).collect();
        let all: Vec<FunctionalDependency> = work.iter().map(|(fd, _)| *fd).collect();
        for (fd, _) in work.iter_mut() {
            for a in fd.lhs.iter() {
                let reduced = fd.lhs.without(a);
                if closure_of(all.iter(), reduced).contains(fd.rhs) {
                    fd.lhs = reduced;
                }
            }
        }
        let mut reduced = FdSet::new();
        for (fd, o) in work {
            reduced.insert_tagged(fd, o);
        }
        reduced.without_redundant()
    }

    /// Drops members implied by the others, in canonical order, without
    /// reducing any lhs.
    pub fn without_redundant(&self) -> FdSet {
        let mut keep: Vec<(FunctionalDependency, Option<Origin>)> =
            self.fds.iter().map(|(fd, o)| (*fd, *o)).collect();
        let mut i = 0;
        while i < keep.len() {
            let fd = keep[i].0;
            let others = keep
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, (g, _))| g);
            if closure_of(others, fd.lhs).contains(fd.rhs) {
                keep.remove(i);
            } else {
                i += 1;
            }
        }
        FdSet {
            fds: keep.into_iter().collect(),
        }
    }

    pub fn display<S: AsRef<str>>(&self, names: &[S]) -> Vec<String> {
        self.iter().map(|fd| fd.display(names).to_string()).collect()
    }
}

impl FromIterator<FunctionalDependency> for FdSet {
    fn from_iter<I: IntoIterator<Item = FunctionalDependency>>(iter: I) -> Self {
        let mut s = FdSet::new();
        for fd in iter {
            s.insert(fd);
        }
        s
    }
}

/// Attribute closure by fixpoint iteration.
pub fn closure_of<'a>(
    fds: impl Iterator<Item = &'a FunctionalDependency> + Clone,
    attrs: AttrSet,
) -> AttrSet {
    let mut closure = attrs;
    loop {
        let before = closure;
        for fd in fds.clone() {
            if fd.lhs.is_subset(closure) {
                closure.insert(fd.rhs);
            }
        }
        if closure == before {
            return closure;
        }
    }
}

/// Serialized form of one dependency.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FdRecord {
    pub lhs: Vec<String>,
    pub rhs: String,
    #[serde(default)]
    pub error: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<Origin>,
}

impl FdRecord {
    pub fn from_fd<S: AsRef<str>>(
        fd: &FunctionalDependency,
        origin: Option<Origin>,
        error: f64,
        names: &[S],
    ) -> Self {
        FdRecord {
            lhs: fd
                .lhs
                .iter()
                .map(|a| names[a.index()].as_ref().to_owned())
                .collect(),
            rhs: names[fd.rhs.index()].as_ref().to_owned(),
            error,
            origin,
        }
    }

    pub fn resolve(&self, instance: &Instance) -> Result<FunctionalDependency> {
        let lhs = instance.attr_set(&self.lhs)?;
        let rhs = instance.attr(&self.rhs)?;
        if lhs.contains(rhs) {
            return Err(Error::Contract(format!(
                "dependency on `{}` is trivial",
                self.rhs
            )));
        }
        Ok(FunctionalDependency::new(lhs, rhs))
    }
}

pub fn to_records<S: AsRef<str>>(set: &FdSet, names: &[S]) -> Vec<FdRecord> {
    set.iter_tagged()
        .map(|(fd, o)| FdRecord::from_fd(fd, o, 0.0, names))
        .collect()
}

#[derive(Deserialize)]
#[serde(untagged)]
enum FdDocument {
    List(Vec<FdRecord>),
    Report { fds: Vec<FdRecord> },
}

/// Parses a JSON list of dependency records, or any object with an `fds`
/// list (such as a discovery report).
pub fn parse_fd_records(text: &str) -> Result<Vec<FdRecord>> {
    let doc: FdDocument = serde_json::from_str(text)?;
    Ok(match doc {
        FdDocument::List(v) | FdDocument::Report { fds: v } => v,
    })
}

/// Resolves records against an instance, splitting exact dependencies from
/// approximate ones (records with a positive error).
pub fn resolve_records(records: &[FdRecord], instance: &Instance) -> Result<(FdSet, Vec<Afd>)> {
    let mut exact = FdSet::new();
    let mut afds = Vec::new();
    for r in records {
        if !r.error.is_finite() || !(0.0..=1.0).contains(&r.error) {
            return Err(Error::Contract(format!("error {} out of range", r.error)));
        }
        let fd = r.resolve(instance)?;
        if r.error > 0.0 {
            let degree = (r.error * instance.row_count() as f64).round() as usize;
            afds.push(Afd {
                fd,
                error: r.error,
                degree,
            });
        } else {
            exact.insert_tagged(fd, r.origin);
        }
    }
    Ok((exact, afds))
}
