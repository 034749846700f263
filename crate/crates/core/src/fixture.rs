//! Deterministic synthetic table pairs with planted dangling rows, duplicate
//! join values and an approximate dependency.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::attrs::{AttrId, MAX_ATTRS};
use crate::error::{Error, Result};
use crate::fd::FunctionalDependency;
use crate::join::{JoinOperator, JoinSpec};
use crate::relation::Instance;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FixtureProfile {
    pub rows_left: usize,
    pub rows_right: usize,
    /// Attribute counts, the join attribute included.
    pub attrs_left: usize,
    pub attrs_right: usize,
    /// Share of each side's rows whose join value has no partner.
    pub dangling: f64,
    /// Share of matched rows repeating a join value already used.
    pub duplicates: f64,
    /// Violations of the planted `flag → target` dependency on the left; 0
    /// plants nothing.
    pub afd_degree: usize,
    /// The planted violators are dangling rows.
    pub afd_dangling: bool,
    pub op: JoinOperator,
}

impl Default for FixtureProfile {
    fn default() -> Self {
        FixtureProfile {
            rows_left: 12,
            rows_right: 12,
            attrs_left: 4,
            attrs_right: 4,
            dangling: 0.2,
            duplicates: 0.3,
            afd_degree: 0,
            afd_dangling: true,
            op: JoinOperator::Inner,
        }
    }
}

/// Named starting points for [`FixtureProfile::parse`].
pub const PRESETS: [&str; 6] = [
    "default",
    "upstage-positive",
    "upstage-negative",
    "low-coverage",
    "high-coverage",
    "motivating",
];

impl FixtureProfile {
    pub fn preset(name: &str) -> Result<Self> {
        let d = FixtureProfile::default();
        Ok(match name {
            "default" => d,
            "upstage-positive" => FixtureProfile {
                rows_left: 10,
                attrs_left: 4,
                dangling: 0.3,
                afd_degree: 1,
                afd_dangling: true,
                ..d
            },
            "upstage-negative" => FixtureProfile {
                afd_dangling: false,
                ..FixtureProfile::preset("upstage-positive")?
            },
            "low-coverage" => FixtureProfile {
                rows_left: 24,
                rows_right: 24,
                dangling: 0.5,
                duplicates: 0.6,
                ..d
            },
            "high-coverage" => FixtureProfile {
                rows_left: 20,
                rows_right: 20,
                attrs_left: 4,
                attrs_right: 4,
                dangling: 0.0,
                duplicates: 0.6,
                ..d
            },
            "motivating" => FixtureProfile {
                rows_left: 7,
                rows_right: 10,
                attrs_left: 5,
                attrs_right: 5,
                dangling: 0.15,
                duplicates: 0.35,
                afd_degree: 1,
                afd_dangling: true,
                op: JoinOperator::Inner,
            },
            _ => return Err(Error::Config(format!("unknown fixture preset {name:?}"))),
        })
    }

    /// A preset name optionally followed by `key=value` overrides, all
    /// comma-separated, e.g. `low-coverage,rows_left=40,op=louter`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut parts = text.split(',').map(str::trim).filter(|p| !p.is_empty()).peekable();
        let mut p = match parts.peek() {
            Some(first) if !first.contains('=') => {
                let name = parts.next().unwrap_or_default();
                FixtureProfile::preset(name)?
            }
            _ => FixtureProfile::default(),
        };
        for part in parts {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("expected key=value, got {part:?}")))?;
            let bad = || Error::Config(format!("invalid value {v:?} for {k}"));
            match k.trim() {
                "rows_left" => p.rows_left = v.parse().map_err(|_| bad())?,
                "rows_right" => p.rows_right = v.parse().map_err(|_| bad())?,
                "attrs_left" => p.attrs_left = v.parse().map_err(|_| bad())?,
                "attrs_right" => p.attrs_right = v.parse().map_err(|_| bad())?,
                "dangling" => p.dangling = v.parse().map_err(|_| bad())?,
                "duplicates" => p.duplicates = v.parse().map_err(|_| bad())?,
                "afd_degree" => p.afd_degree = v.parse().map_err(|_| bad())?,
                "afd_dangling" => p.afd_dangling = v.parse().map_err(|_| bad())?,
                "op" => p.op = v.parse()?,
                other => return Err(Error::Config(format!("unknown profile key {other:?}"))),
            }
        }
        p.check()?;
        Ok(p)
    }

    fn dangling_rows(&self, rows: usize) -> usize {
        (rows as f64 * self.dangling).round() as usize
    }

    pub fn check(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if !(0.0..1.0).contains(&self.dangling) || !(0.0..1.0).contains(&self.duplicates) {
            return fail("dangling and duplicates must lie in [0, 1)".into());
        }
        if self.rows_left == 0 || self.rows_right == 0 {
            return fail("both sides need rows".into());
        }
        if self.attrs_left < 1 || self.attrs_right < 1 {
            return fail("both sides need the join attribute".into());
        }
        if self.attrs_left > MAX_ATTRS || self.attrs_right > MAX_ATTRS {
            return fail(format!("at most {MAX_ATTRS} attributes per side"));
        }
        let ml = self.rows_left - self.dangling_rows(self.rows_left);
        let mr = self.rows_right - self.dangling_rows(self.rows_right);
        if ml == 0 || mr == 0 {
            return fail("every row would dangle".into());
        }
        if self.duplicates == 0.0 && ml != mr {
            return fail(format!(
                "without duplicates both sides need as many matched rows ({ml} vs {mr})"
            ));
        }
        if self.afd_degree > 0 {
            if self.attrs_left < 3 {
                return fail("a planted dependency needs three left attributes".into());
            }
            let pool = if self.afd_dangling {
                self.dangling_rows(self.rows_left)
            } else {
                ml
            };
            if pool < self.afd_degree {
                return fail(format!(
                    "{} violators requested but only {pool} candidate rows",
                    self.afd_degree
                ));
            }
            // Violators must stay a strict minority of their flag class.
            if 4 * self.afd_degree >= self.rows_left {
                return fail("too many violators for the left row count".into());
            }
        }
        Ok(())
    }
}

impl fmt::Display for FixtureProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "rows_left={},rows_right={},attrs_left={},attrs_right={},dangling={},duplicates={},afd_degree={},afd_dangling={},op={}",
            self.rows_left,
            self.rows_right,
            self.attrs_left,
            self.attrs_right,
            self.dangling,
            self.duplicates,
            self.afd_degree,
            self.afd_dangling,
            self.op
        )
    }
}

impl FromStr for FixtureProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FixtureProfile::parse(s)
    }
}

#[derive(Clone, Debug)]
pub struct Fixture {
    pub left: Instance,
    pub right: Instance,
    pub spec: JoinSpec,
    /// `flag → target` on the left, when planted.
    pub planted: Option<FunctionalDependency>,
    /// Left rows violating the planted dependency.
    pub violators: Vec<usize>,
    /// An error bound admitting the planted dependency as approximate.
    pub epsilon: f64,
}

/// Builds the pair described by `profile`. The left table is
/// `k, flag, target, a3…` and the right one `k, b1…`, both joined on `k`.
/// `b1` is a function of `k`, `a3` is unique per row, the other columns are
/// small random domains.
pub fn make_fixture(profile: &FixtureProfile, seed: u64) -> Result<Fixture> {
    profile.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = profile;
    let dl = p.dangling_rows(p.rows_left);
    let dr = p.dangling_rows(p.rows_right);
    let ml = p.rows_left - dl;
    let mr = p.rows_right - dr;
    let shared = ((ml.min(mr) as f64) * (1.0 - p.duplicates)).round().max(1.0) as usize;
    let keys = |rng: &mut ChaCha8Rng, matched: usize, dangling: usize, tag: &str| {
        let mut ks: Vec<String> = (0..matched)
            .map(|i| {
                if i < shared {
                    format!("v{i}")
                } else {
                    format!("v{}", rng.random_range(0..shared))
                }
            })
            .collect();
        ks.shuffle(rng);
        ks.extend((0..dangling).map(|i| format!("{tag}{i}")));
        ks
    };
    let lkeys = keys(&mut rng, ml, dl, "dl");
    let rkeys = keys(&mut rng, mr, dr, "dr");

    // Left rows: matched rows first, dangling rows last.
    let mut violators = Vec::new();
    if p.afd_degree > 0 {
        let pool: Vec<usize> = if p.afd_dangling {
            (ml..p.rows_left).collect()
        } else {
            (0..ml).collect()
        };
        let mut pool = pool;
        pool.shuffle(&mut rng);
        violators = pool[..p.afd_degree].to_vec();
        violators.sort_unstable();
    }
    let lnames: Vec<String> = (0..p.attrs_left)
        .map(|j| match j {
            0 => "k".to_owned(),
            1 if p.afd_degree > 0 => "flag".to_owned(),
            2 if p.afd_degree > 0 => "target".to_owned(),
            _ => format!("a{j}"),
        })
        .collect();
    let key_value = |k: &str, salt: usize| -> String {
        let h = k.bytes().fold(salt as u64 + 7, |h, b| h.wrapping_mul(31).wrapping_add(b as u64));
        (h % 3).to_string()
    };
    let mut lrows = Vec::with_capacity(p.rows_left);
    for (i, k) in lkeys.iter().enumerate() {
        let flag = i % 2;
        let mut row = vec![Some(k.clone())];
        for j in 1..p.attrs_left {
            let v = match j {
                1 if p.afd_degree > 0 => flag.to_string(),
                2 if p.afd_degree > 0 => {
                    if violators.contains(&i) {
                        "x".to_owned()
                    } else {
                        format!("t{flag}")
                    }
                }
                3 => format!("u{i}"),
                _ => rng.random_range(0..3).to_string(),
            };
            row.push(Some(v));
        }
        lrows.push(row);
    }
    let rnames: Vec<String> = (0..p.attrs_right)
        .map(|j| if j == 0 { "k".to_owned() } else { format!("b{j}") })
        .collect();
    let mut rrows = Vec::with_capacity(p.rows_right);
    for k in &rkeys {
        let mut row = vec![Some(k.clone())];
        for j in 1..p.attrs_right {
            let v = match j {
                1 => key_value(k, 1),
                _ => rng.random_range(0..3).to_string(),
            };
            row.push(Some(v));
        }
        rrows.push(row);
    }
    let left = Instance::from_rows("L", &lnames, &lrows)?;
    let right = Instance::from_rows("R", &rnames, &rrows)?;
    let spec = JoinSpec::new(p.op, vec![AttrId::new(0)], vec![AttrId::new(0)]);
    let planted = (p.afd_degree > 0)
        .then(|| FunctionalDependency::new([AttrId::new(1)].into_iter().collect(), AttrId::new(2)));
    let epsilon = if p.afd_degree > 0 {
        (p.afd_degree as f64 + 0.5) / p.rows_left as f64
    } else {
        0.0
    };
    Ok(Fixture {
        left,
        right,
        spec,
        planted,
        violators,
        epsilon,
    })
}

/// The four-row and four-row pair on which a cross-table dependency holds
/// that no inference rule yields.
pub fn proof_tables() -> (Instance, Instance) {
    let l = Instance::from_strs(
        "L",
        &["X", "A"],
        &[&["0", "0"], &["1", "0"], &["1", "1"], &["2", "2"]],
    )
    .expect("well-formed");
    let r = Instance::from_strs(
        "R",
        &["Y", "A'", "b"],
        &[&["0", "0", "0"], &["1", "0", "0"], &["1", "1", "1"], &["2", "1", "0"]],
    )
    .expect("well-formed");
    (l, r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::join::coverage;
    use num_rational::Ratio;

    #[test]
    fn presets_parse_and_build() {
        for name in PRESETS {
            let p = FixtureProfile::parse(name).unwrap();
            let f = make_fixture(&p, 3).unwrap();
            assert_eq!(f.left.row_count(), p.rows_left);
            assert_eq!(f.right.arity(), p.attrs_right);
        }
    }

    #[test]
    fn overrides_and_errors() {
        let p = FixtureProfile::parse("low-coverage,rows_left=30,op=louter").unwrap();
        assert_eq!((p.rows_left, p.op), (30, JoinOperator::LeftOuter));
        assert_eq!(FixtureProfile::parse(&p.to_string()).unwrap(), p);
        assert!(FixtureProfile::parse("nope").is_err());
        assert!(FixtureProfile::parse("rows_left=x").is_err());
        assert!(FixtureProfile::parse("dangling=0,duplicates=0,rows_left=4,rows_right=5").is_err());
    }

    #[test]
    fn no_dangling_no_duplicates_gives_unit_coverage() {
        let p = FixtureProfile::parse("dangling=0,duplicates=0,rows_left=9,rows_right=9").unwrap();
        for seed in 0..5 {
            let f = make_fixture(&p, seed).unwrap();
            let c = coverage(&f.left, &f.right, &f.spec).unwrap();
            assert_eq!(c.coverage, Ratio::from_integer(1));
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let p = FixtureProfile::preset("motivating").unwrap();
        let a = make_fixture(&p, 9).unwrap();
        let b = make_fixture(&p, 9).unwrap();
        assert_eq!(a.left.to_rows(), b.left.to_rows());
        assert_eq!(a.right.to_rows(), b.right.to_rows());
    }
}
