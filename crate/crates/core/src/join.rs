//! Hash joins over instances, partial joins and join coverage.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::Serialize;

use crate::attrs::{AttrId, AttrSet, MAX_ATTRS};
use crate::error::{Error, Result};
use crate::relation::{unqualified, Column, Instance, ValueTuple, NULL_CODE};

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize)]
pub enum JoinOperator {
    #[serde(rename = "inner")]
    Inner,
    #[serde(rename = "lsemi")]
    LeftSemi,
    #[serde(rename = "rsemi")]
    RightSemi,
    #[serde(rename = "louter")]
    LeftOuter,
    #[serde(rename = "router")]
    RightOuter,
    #[serde(rename = "fouter")]
    FullOuter,
}

impl JoinOperator {
    pub const ALL: [JoinOperator; 6] = [
        JoinOperator::Inner,
        JoinOperator::LeftSemi,
        JoinOperator::RightSemi,
        JoinOperator::LeftOuter,
        JoinOperator::RightOuter,
        JoinOperator::FullOuter,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            JoinOperator::Inner => "inner",
            JoinOperator::LeftSemi => "lsemi",
            JoinOperator::RightSemi => "rsemi",
            JoinOperator::LeftOuter => "louter",
            JoinOperator::RightOuter => "router",
            JoinOperator::FullOuter => "fouter",
        }
    }

    /// Dangling left rows appear in the output, padded with nulls.
    pub fn keeps_dangling_left(self) -> bool {
        matches!(self, JoinOperator::LeftOuter | JoinOperator::FullOuter)
    }

    pub fn keeps_dangling_right(self) -> bool {
        matches!(self, JoinOperator::RightOuter | JoinOperator::FullOuter)
    }

    /// Left attributes appear in the output.
    pub fn outputs_left(self) -> bool {
        self != JoinOperator::RightSemi
    }

    pub fn outputs_right(self) -> bool {
        self != JoinOperator::LeftSemi
    }

    /// Left attributes may be null-padded in the output.
    pub fn pads_left(self) -> bool {
        self.keeps_dangling_right()
    }

    pub fn pads_right(self) -> bool {
        self.keeps_dangling_left()
    }

    /// The operator with the roles of both inputs exchanged.
    pub fn flipped(self) -> JoinOperator {
        match self {
            JoinOperator::LeftSemi => JoinOperator::RightSemi,
            JoinOperator::RightSemi => JoinOperator::LeftSemi,
            JoinOperator::LeftOuter => JoinOperator::RightOuter,
            JoinOperator::RightOuter => JoinOperator::LeftOuter,
            op => op,
        }
    }
}

impl fmt::Display for JoinOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for JoinOperator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        JoinOperator::ALL
            .into_iter()
            .find(|op| op.as_str() == s)
            .ok_or_else(|| Error::InvalidSpec(format!("unknown join operator `{s}`")))
    }
}

/// `left ◇ right` on positionally paired attribute lists.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct JoinSpec {
    pub op: JoinOperator,
    pub left_on: Vec<AttrId>,
    pub right_on: Vec<AttrId>,
    /// Natural-join semantics: each right join column is folded into its
    /// left partner instead of being kept.
    pub merge_keys: bool,
}

impl JoinSpec {
    pub fn new(op: JoinOperator, left_on: Vec<AttrId>, right_on: Vec<AttrId>) -> Self {
        JoinSpec {
            op,
            left_on,
            right_on,
            merge_keys: false,
        }
    }

    /// Equi-join on pairs of attribute names.
    pub fn by_names(
        op: JoinOperator,
        left: &Instance,
        right: &Instance,
        pairs: &[(&str, &str)],
    ) -> Result<Self> {
        let mut l = Vec::new();
        let mut r = Vec::new();
        for (x, y) in pairs {
            l.push(left.attr(x)?);
            r.push(right.attr(y)?);
        }
        let spec = JoinSpec::new(op, l, r);
        spec.validate(left, right)?;
        Ok(spec)
    }

    /// Parses `X=Y,X2=Y2`.
    pub fn parse_on(op: JoinOperator, left: &Instance, right: &Instance, on: &str) -> Result<Self> {
        let pairs = parse_on_pairs(on)?;
        let borrowed: Vec<(&str, &str)> =
            pairs.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
        JoinSpec::by_names(op, left, right, &borrowed)
    }

    /// Natural join on attributes sharing an unqualified name.
    pub fn natural(op: JoinOperator, left: &Instance, right: &Instance) -> Result<Self> {
        let mut l = Vec::new();
        let mut r = Vec::new();
        for (i, ln) in left.attr_names().iter().enumerate() {
            let hits: Vec<usize> = right
                .attr_names()
                .iter()
                .enumerate()
                .filter(|(_, rn)| unqualified(rn) == unqualified(ln))
                .map(|(j, _)| j)
                .collect();
            match hits.as_slice() {
                [] => {}
                [j] => {
                    l.push(AttrId::new(i));
                    r.push(AttrId::new(*j));
                }
                _ => return Err(Error::AmbiguousAttribute(unqualified(ln).to_owned())),
            }
        }
        if l.is_empty() {
            return Err(Error::InvalidSpec(
                "natural join over tables without common attributes".into(),
            ));
        }
        let spec = JoinSpec {
            op,
            left_on: l,
            right_on: r,
            merge_keys: true,
        };
        spec.validate(left, right)?;
        Ok(spec)
    }

    pub fn validate(&self, left: &Instance, right: &Instance) -> Result<()> {
        if self.left_on.len() != self.right_on.len() {
            return Err(Error::InvalidSpec(format!(
                "{} left join attributes but {} right ones",
                self.left_on.len(),
                self.right_on.len()
            )));
        }
        if self.left_on.is_empty() {
            return Err(Error::InvalidSpec("no join attributes".into()));
        }
        left.check_list(&self.left_on)?;
        right.check_list(&self.right_on)?;
        if self.left_set().len() != self.left_on.len() || self.right_set().len() != self.right_on.len()
        {
            return Err(Error::InvalidSpec("repeated join attribute".into()));
        }
        let width = self.output_width(left.arity(), right.arity());
        if width > MAX_ATTRS {
            return Err(Error::SchemaTooWide(width));
        }
        Ok(())
    }

    pub fn left_set(&self) -> AttrSet {
        self.left_on.iter().collect()
    }

    pub fn right_set(&self) -> AttrSet {
        self.right_on.iter().collect()
    }

    /// The same join with both inputs exchanged.
    pub fn flipped(&self) -> JoinSpec {
        JoinSpec {
            op: self.op.flipped(),
            left_on: self.right_on.clone(),
            right_on: self.left_on.clone(),
            merge_keys: self.merge_keys,
        }
    }

    fn output_width(&self, left: usize, right: usize) -> usize {
        let merged = if self.merge_keys { self.right_on.len() } else { 0 };
        match self.op {
            JoinOperator::LeftSemi => left,
            JoinOperator::RightSemi => right,
            _ => left + right - merged,
        }
    }
}

pub fn parse_on_pairs(on: &str) -> Result<Vec<(String, String)>> {
    let pairs: Vec<(String, String)> = on
        .split(',')
        .map(|p| {
            let (x, y) = p
                .split_once('=')
                .ok_or_else(|| Error::InvalidSpec(format!("`{p}` is not of the form X=Y")))?;
            let (x, y) = (x.trim(), y.trim());
            if x.is_empty() || y.is_empty() {
                return Err(Error::InvalidSpec(format!("`{p}` has an empty side")));
            }
            Ok((x.to_owned(), y.to_owned()))
        })
        .collect::<Result<_>>()?;
    Ok(pairs)
}

/// Join keys of both sides in one shared code space. Right values absent from
/// the left dictionary get fresh codes that match nothing on the left.
struct KeySpace {
    left: Vec<Vec<u32>>,
    right: Vec<Vec<u32>>,
}

impl KeySpace {
    fn build(left: &Instance, right: &Instance, spec: &JoinSpec) -> Self {
        let lkeys = (0..left.row_count())
            .map(|r| left.row_key(r, &spec.left_on))
            .collect();
        let translations: Vec<Vec<u32>> = spec
            .left_on
            .iter()
            .zip(&spec.right_on)
            .map(|(&x, &y)| {
                let lmap = left.column(x).lookup_map();
                let base = left.column(x).dictionary().len() as u32;
                right
                    .column(y)
                    .dictionary()
                    .iter()
                    .enumerate()
                    .map(|(i, s)| lmap.get(s.as_str()).copied().unwrap_or(base + i as u32))
                    .collect()
            })
            .collect();
        let rkeys = (0..right.row_count())
            .map(|r| {
                spec.right_on
                    .iter()
                    .zip(&translations)
                    .map(|(&y, t)| {
                        let c = right.codes(y)[r];
                        if c == NULL_CODE {
                            NULL_CODE
                        } else {
                            t[c as usize]
                        }
                    })
                    .collect()
            })
            .collect();
        KeySpace {
            left: lkeys,
            right: rkeys,
        }
    }

    fn right_index(&self) -> HashMap<&[u32], Vec<usize>> {
        let mut idx: HashMap<&[u32], Vec<usize>> = HashMap::new();
        for (r, k) in self.right.iter().enumerate() {
            idx.entry(k.as_slice()).or_default().push(r);
        }
        idx
    }
}

/// Which rows of each input find a partner on the other side.
/// Join keys of both sides, row by row, in one shared code space.
pub(crate) fn shared_keys(
    left: &Instance,
    right: &Instance,
    spec: &JoinSpec,
) -> (Vec<Vec<u32>>, Vec<Vec<u32>>) {
    let keys = KeySpace::build(left, right, spec);
    (keys.left, keys.right)
}

pub(crate) fn match_flags(left: &Instance, right: &Instance, spec: &JoinSpec) -> (Vec<bool>, Vec<bool>) {
    let keys = KeySpace::build(left, right, spec);
    let lset: HashSet<&[u32]> = keys.left.iter().map(Vec::as_slice).collect();
    let rset: HashSet<&[u32]> = keys.right.iter().map(Vec::as_slice).collect();
    (
        keys.left.iter().map(|k| rset.contains(k.as_slice())).collect(),
        keys.right.iter().map(|k| lset.contains(k.as_slice())).collect(),
    )
}

/// Row pairing of a join before column materialization.
#[derive(Clone, Debug, Default)]
pub(crate) struct Pairing {
    pub(crate) rows: Vec<(Option<usize>, Option<usize>)>,
}

fn pairing(left: &Instance, right: &Instance, spec: &JoinSpec) -> Pairing {
    let keys = KeySpace::build(left, right, spec);
    let idx = keys.right_index();
    let mut right_matched = vec![false; right.row_count()];
    let mut left_matched = vec![false; left.row_count()];
    let mut rows = Vec::new();
    for (l, k) in keys.left.iter().enumerate() {
        match idx.get(k.as_slice()) {
            Some(rs) => {
                left_matched[l] = true;
                for &r in rs {
                    right_matched[r] = true;
                    if spec.op != JoinOperator::LeftSemi && spec.op != JoinOperator::RightSemi {
                        rows.push((Some(l), Some(r)));
                    }
                }
            }
            None if spec.op.keeps_dangling_left() => rows.push((Some(l), None)),
            None => {}
        }
    }
    match spec.op {
        JoinOperator::LeftSemi => {
            rows = (0..left.row_count())
                .filter(|&l| left_matched[l])
                .map(|l| (Some(l), None))
                .collect();
        }
        JoinOperator::RightSemi => {
            rows = (0..right.row_count())
                .filter(|&r| right_matched[r])
                .map(|r| (None, Some(r)))
                .collect();
        }
        op if op.keeps_dangling_right() => {
            rows.extend(
                (0..right.row_count())
                    .filter(|&r| !right_matched[r])
                    .map(|r| (None, Some(r))),
            );
        }
        _ => {}
    }
    Pairing { rows }
}

fn gather_padded(col: &Column, picks: impl Iterator<Item = Option<usize>>) -> Column {
    let codes = picks
        .map(|p| p.map_or(NULL_CODE, |r| col.codes()[r]))
        .collect();
    Column::from_parts(col.name().to_owned(), col.shared_dictionary(), codes)
}

fn unique_name(name: &str, taken: &HashSet<String>) -> String {
    let mut n = name.to_owned();
    while taken.contains(&n) {
        n.push('\'');
    }
    n
}

fn materialize(
    left: &Instance,
    right: &Instance,
    spec: &JoinSpec,
    pairing: &Pairing,
    keep_left: AttrSet,
    keep_right: AttrSet,
) -> Result<Instance> {
    let mut columns = Vec::new();
    let mut taken = HashSet::new();
    if spec.op.outputs_left() {
        for a in keep_left.iter() {
            let mut col = gather_padded(left.column(a), pairing.rows.iter().map(|p| p.0));
            if spec.merge_keys {
                if let Some(pos) = spec.left_on.iter().position(|&x| x == a) {
                    if spec.op.keeps_dangling_right() {
                        col = coalesce(&col, right.column(spec.right_on[pos]), pairing);
                    }
                }
            }
            taken.insert(col.name().to_owned());
            columns.push(col);
        }
    }
    if spec.op.outputs_right() {
        let merged = if spec.merge_keys && spec.op.outputs_left() {
            spec.right_set()
        } else {
            AttrSet::EMPTY
        };
        for a in keep_right.difference(merged).iter() {
            let col = gather_padded(right.column(a), pairing.rows.iter().map(|p| p.1));
            let name = unique_name(col.name(), &taken);
            taken.insert(name.clone());
            columns.push(Column::from_parts(
                name,
                col.shared_dictionary(),
                col.codes().to_vec(),
            ));
        }
    }
    let name = format!("{}_{}_{}", left.name(), spec.op, right.name());
    let out = Instance::new(name, columns, pairing.rows.len())?;
    Ok(if matches!(spec.op, JoinOperator::LeftSemi | JoinOperator::RightSemi) {
        out.dedup_rows()
    } else {
        out
    })
}

/// Left key column with right key values filled in for right-only rows.
fn coalesce(left_key: &Column, right_key: &Column, pairing: &Pairing) -> Column {
    let values: Vec<Option<&str>> = pairing
        .rows
        .iter()
        .enumerate()
        .map(|(i, p)| match p {
            (Some(_), _) => left_key.decode(left_key.codes()[i]),
            (None, Some(r)) => right_key.value(*r),
            (None, None) => None,
        })
        .collect();
    Column::encode(left_key.name(), &values)
}

/// Attribute names of `left ◇ right`, in output order.
pub fn join_schema(left: &Instance, right: &Instance, spec: &JoinSpec) -> Vec<String> {
    let mut names = Vec::new();
    let mut taken = HashSet::new();
    if spec.op.outputs_left() {
        for a in left.all_attrs().iter() {
            let n = left.attr_name(a).to_owned();
            taken.insert(n.clone());
            names.push(n);
        }
    }
    if spec.op.outputs_right() {
        let merged = if spec.merge_keys && spec.op.outputs_left() {
            spec.right_set()
        } else {
            AttrSet::EMPTY
        };
        for a in right.all_attrs().difference(merged).iter() {
            let n = unique_name(right.attr_name(a), &taken);
            taken.insert(n.clone());
            names.push(n);
        }
    }
    names
}

/// `left ◇ right`. The schema is the left attributes followed by the right
/// ones; semi-joins keep one side and remove duplicate rows.
pub fn join(left: &Instance, right: &Instance, spec: &JoinSpec) -> Result<Instance> {
    spec.validate(left, right)?;
    let p = pairing(left, right, spec);
    materialize(left, right, spec, &p, left.all_attrs(), right.all_attrs())
}

/// The projection of `left ◇ right` onto the kept attributes, computed
/// without materializing the other columns.
pub fn partial_join(
    left: &Instance,
    right: &Instance,
    spec: &JoinSpec,
    keep_left: AttrSet,
    keep_right: AttrSet,
) -> Result<Instance> {
    spec.validate(left, right)?;
    if spec.merge_keys {
        return Err(Error::InvalidSpec(
            "partial joins need explicit equi-join attributes".into(),
        ));
    }
    left.check_attrs(keep_left)?;
    right.check_attrs(keep_right)?;
    if !spec.left_set().is_subset(keep_left) || !spec.right_set().is_subset(keep_right) {
        return Err(Error::InvalidSpec(
            "kept attributes must include the join attributes".into(),
        ));
    }
    let p = pairing(left, right, spec);
    let semi = matches!(spec.op, JoinOperator::LeftSemi | JoinOperator::RightSemi);
    if semi {
        let full = materialize(left, right, spec, &p, left.all_attrs(), right.all_attrs())?;
        let keep = if spec.op == JoinOperator::LeftSemi {
            keep_left
        } else {
            keep_right
        };
        return full.project(keep);
    }
    materialize(left, right, spec, &p, keep_left, keep_right)
}

/// Row count of `left ◇ right`, evaluated from key multiplicities.
pub fn join_row_count(left: &Instance, right: &Instance, spec: &JoinSpec) -> Result<u64> {
    spec.validate(left, right)?;
    let keys = KeySpace::build(left, right, spec);
    let mut lm: HashMap<&[u32], u64> = HashMap::new();
    let mut rm: HashMap<&[u32], u64> = HashMap::new();
    for k in &keys.left {
        *lm.entry(k.as_slice()).or_default() += 1;
    }
    for k in &keys.right {
        *rm.entry(k.as_slice()).or_default() += 1;
    }
    let distinct_matching = |inst: &Instance, ks: &[Vec<u32>], other: &HashMap<&[u32], u64>| {
        let all: Vec<AttrId> = inst.all_attrs().iter().collect();
        let rows: HashSet<Vec<u32>> = (0..inst.row_count())
            .filter(|&r| other.contains_key(ks[r].as_slice()))
            .map(|r| inst.row_key(r, &all))
            .collect();
        rows.len() as u64
    };
    Ok(match spec.op {
        JoinOperator::LeftSemi => distinct_matching(left, &keys.left, &rm),
        JoinOperator::RightSemi => distinct_matching(right, &keys.right, &lm),
        op => {
            let mut n: u64 = lm
                .iter()
                .filter_map(|(k, a)| rm.get(k).map(|b| a * b))
                .sum();
            if op.keeps_dangling_left() {
                n += lm.iter().filter(|(k, _)| !rm.contains_key(*k)).map(|(_, a)| a).sum::<u64>();
            }
            if op.keeps_dangling_right() {
                n += rm.iter().filter(|(k, _)| !lm.contains_key(*k)).map(|(_, b)| b).sum::<u64>();
            }
            n
        }
    })
}

/// Survival ratio of one join value.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValueCoverage {
    pub value: ValueTuple,
    #[serde(serialize_with = "ser_ratio")]
    pub ratio: Ratio<u64>,
}

/// Join coverage of both sides, under inner-join semantics.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoverageReport {
    #[serde(serialize_with = "ser_ratio")]
    pub cov_left: Ratio<u64>,
    #[serde(serialize_with = "ser_ratio")]
    pub cov_right: Ratio<u64>,
    #[serde(serialize_with = "ser_ratio")]
    pub coverage: Ratio<u64>,
    pub per_value_left: Vec<ValueCoverage>,
    pub per_value_right: Vec<ValueCoverage>,
}

impl CoverageReport {
    pub fn coverage_f64(&self) -> f64 {
        ratio_f64(self.coverage)
    }
}

pub fn ratio_f64(r: Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn ser_ratio<S: serde::Serializer>(r: &Ratio<u64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeStruct;
    let mut st = s.serialize_struct("ratio", 2)?;
    st.serialize_field("exact", &r.to_string())?;
    st.serialize_field("value", &ratio_f64(*r))?;
    st.end()
}

/// For each side, the average over its distinct join values `v` of
/// `|σ_{=v}(L ⋈ R)| / |σ_{=v}(side)|`, which is the multiplicity of `v` on
/// the other side. Both averages and their mean are exact rationals.
pub fn coverage(left: &Instance, right: &Instance, spec: &JoinSpec) -> Result<CoverageReport> {
    spec.validate(left, right)?;
    let keys = KeySpace::build(left, right, spec);
    let count = |ks: &[Vec<u32>]| {
        let mut m: BTreeMap<Vec<u32>, (u64, usize)> = BTreeMap::new();
        for (r, k) in ks.iter().enumerate() {
            m.entry(k.clone()).or_insert((0, r)).0 += 1;
        }
        m
    };
    let lm = count(&keys.left);
    let rm = count(&keys.right);
    let side = |this: &BTreeMap<Vec<u32>, (u64, usize)>,
                other: &BTreeMap<Vec<u32>, (u64, usize)>,
                inst: &Instance,
                on: &[AttrId]| {
        let per: Vec<ValueCoverage> = this
            .iter()
            .map(|(k, &(_, row))| ValueCoverage {
                value: inst.row_values(row, on),
                ratio: Ratio::from_integer(other.get(k).map_or(0, |e| e.0)),
            })
            .collect();
        let total: u64 = per.iter().map(|v| *v.ratio.numer()).sum();
        let avg = if per.is_empty() {
            Ratio::from_integer(0)
        } else {
            Ratio::new(total, per.len() as u64)
        };
        (avg, per)
    };
    let (cov_left, per_value_left) = side(&lm, &rm, left, &spec.left_on);
    let (cov_right, per_value_right) = side(&rm, &lm, right, &spec.right_on);
    Ok(CoverageReport {
        cov_left,
        cov_right,
        coverage: (cov_left + cov_right) / Ratio::from_integer(2),
        per_value_left,
        per_value_right,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn proof_tables() -> (Instance, Instance) {
        let l = Instance::from_strs(
            "L",
            &["X", "A"],
            &[&["0", "0"], &["1", "0"], &["1", "1"], &["2", "2"]],
        )
        .unwrap();
        let r = Instance::from_strs(
            "R",
            &["Y", "A'", "b"],
            &[&["0", "0", "0"], &["1", "0", "0"], &["1", "1", "1"], &["2", "1", "0"]],
        )
        .unwrap();
        (l, r)
    }

    fn rows(i: &Instance) -> Vec<Vec<String>> {
        let mut v: Vec<Vec<String>> = i
            .to_rows()
            .into_iter()
            .map(|r| r.into_iter().map(|c| c.unwrap_or_else(|| "ν".into())).collect())
            .collect();
        v.sort();
        v
    }

    fn spec(op: JoinOperator, l: &Instance, r: &Instance) -> JoinSpec {
        JoinSpec::by_names(op, l, r, &[("X", "Y")]).unwrap()
    }

    #[test]
    fn proof_tables_inner_join() {
        let (l, r) = proof_tables();
        let j = join(&l, &r, &spec(JoinOperator::Inner, &l, &r)).unwrap();
        assert_eq!(j.attr_names(), vec!["L.X", "L.A", "R.Y", "R.A'", "R.b"]);
        let expect: Vec<Vec<String>> = [
            ["0", "0", "0", "0", "0"],
            ["1", "0", "1", "0", "0"],
            ["1", "0", "1", "1", "1"],
            ["1", "1", "1", "0", "0"],
            ["1", "1", "1", "1", "1"],
            ["2", "2", "2", "1", "0"],
        ]
        .iter()
        .map(|r| r.iter().map(|s| s.to_string()).collect())
        .collect();
        assert_eq!(rows(&j), expect);
    }

    #[test]
    fn disjoint_values() {
        let l = Instance::from_strs("L", &["X", "A"], &[&["1", "a"]]).unwrap();
        let r = Instance::from_strs("R", &["Y", "B"], &[&["2", "b"]]).unwrap();
        let inner = join(&l, &r, &spec(JoinOperator::Inner, &l, &r)).unwrap();
        assert_eq!(inner.row_count(), 0);
        let full = join(&l, &r, &spec(JoinOperator::FullOuter, &l, &r)).unwrap();
        assert_eq!(
            rows(&full),
            vec![
                vec!["1".to_string(), "a".into(), "ν".into(), "ν".into()],
                vec!["ν".to_string(), "ν".into(), "2".into(), "b".into()],
            ]
        );
        let c = coverage(&l, &r, &spec(JoinOperator::Inner, &l, &r)).unwrap();
        assert_eq!(c.coverage, Ratio::from_integer(0));
    }

    #[test]
    fn left_outer_pads_dangling_row() {
        let l = Instance::from_strs("L", &["X", "A"], &[&["1", "a"], &["3", "c"]]).unwrap();
        let r = Instance::from_strs("R", &["Y", "B"], &[&["1", "b"]]).unwrap();
        let j = join(&l, &r, &spec(JoinOperator::LeftOuter, &l, &r)).unwrap();
        assert_eq!(j.row_count(), 2);
        assert_eq!(j.value(1, AttrId::new(2)), None);
        assert_eq!(j.value(1, AttrId::new(1)), Some("c"));
    }

    #[test]
    fn semi_joins_deduplicate() {
        let (l, r) = proof_tables();
        let ls = join(&l, &r, &spec(JoinOperator::LeftSemi, &l, &r)).unwrap();
        assert_eq!(ls.arity(), 2);
        assert_eq!(ls.row_count(), 4);
        let dup = Instance::from_strs("L", &["X", "A"], &[&["1", "a"], &["1", "a"]]).unwrap();
        let ls = join(&dup, &r, &spec(JoinOperator::LeftSemi, &dup, &r)).unwrap();
        assert_eq!(ls.row_count(), 1);
        let rs = join(&l, &r, &spec(JoinOperator::RightSemi, &l, &r)).unwrap();
        assert_eq!(rs.attr_names(), vec!["R.Y", "R.A'", "R.b"]);
    }

    #[test]
    fn natural_join_merges_keys() {
        let l = Instance::from_strs("L", &["k", "a"], &[&["1", "x"], &["2", "y"]]).unwrap();
        let r = Instance::from_strs("R", &["k", "b"], &[&["1", "p"], &["3", "q"]]).unwrap();
        let s = JoinSpec::natural(JoinOperator::FullOuter, &l, &r).unwrap();
        let j = join(&l, &r, &s).unwrap();
        assert_eq!(j.attr_names(), vec!["L.k", "L.a", "R.b"]);
        let keys: Vec<Option<&str>> = (0..3).map(|i| j.value(i, AttrId::new(0))).collect();
        assert_eq!(keys, vec![Some("1"), Some("2"), Some("3")]);
        let none = Instance::from_strs("R", &["z"], &[&["1"]]).unwrap();
        assert!(JoinSpec::natural(JoinOperator::Inner, &l, &none).is_err());
    }

    #[test]
    fn spec_errors() {
        let (l, r) = proof_tables();
        let bad = JoinSpec::new(JoinOperator::Inner, vec![AttrId::new(0)], vec![]);
        assert!(matches!(join(&l, &r, &bad), Err(Error::InvalidSpec(_))));
        assert!(JoinSpec::by_names(JoinOperator::Inner, &l, &r, &[("nope", "Y")]).is_err());
        assert!(parse_on_pairs("X").is_err());
        assert_eq!(
            parse_on_pairs("a=b, c = d").unwrap(),
            vec![("a".into(), "b".into()), ("c".into(), "d".into())]
        );
        assert_eq!("fouter".parse::<JoinOperator>().unwrap(), JoinOperator::FullOuter);
    }

    #[test]
    fn partial_join_keeps_requested_columns() {
        let (l, r) = proof_tables();
        let s = spec(JoinOperator::Inner, &l, &r);
        let p = partial_join(&l, &r, &s, l.all_attrs(), [AttrId::new(0), AttrId::new(2)].iter().collect())
            .unwrap();
        assert_eq!((p.row_count(), p.arity()), (6, 4));
        let missing = partial_join(&l, &r, &s, AttrSet::singleton(AttrId::new(1)), r.all_attrs());
        assert!(missing.is_err());
    }

    #[test]
    fn coverage_examples() {
        let (l, r) = proof_tables();
        let c = coverage(&l, &r, &spec(JoinOperator::Inner, &l, &r)).unwrap();
        assert_eq!(c.cov_left, Ratio::new(4, 3));
        assert_eq!(c.cov_right, Ratio::new(4, 3));
        assert_eq!(c.coverage, Ratio::new(4, 3));
        let k = Instance::from_strs("L", &["X"], &[&["1"], &["2"]]).unwrap();
        let k2 = Instance::from_strs("R", &["Y"], &[&["2"], &["1"]]).unwrap();
        let c = coverage(&k, &k2, &spec(JoinOperator::Inner, &k, &k2)).unwrap();
        assert_eq!(c.coverage, Ratio::from_integer(1));
    }

    #[test]
    fn row_count_matches_materialized_join() {
        let (l, r) = proof_tables();
        for op in JoinOperator::ALL {
            let s = spec(op, &l, &r);
            let n = join_row_count(&l, &r, &s).unwrap();
            assert_eq!(n as usize, join(&l, &r, &s).unwrap().row_count(), "{op}");
        }
    }
}
