//! End-to-end join dependency discovery and its JSON report.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::attrs::AttrSet;
use crate::context::{Counters, JoinContext};
use crate::error::{Error, Result};
use crate::fd::{FdRecord, FdSet, FunctionalDependency, Origin};
use crate::infer::{infer_join_fds, Provenance};
use crate::join::{coverage, join, join_row_count, join_schema, CoverageReport, JoinOperator, JoinSpec};
use crate::mine::discover_selective;
use crate::oracle::{oracle_join_fds, DEFAULT_ROW_LIMIT};
use crate::relation::Instance;
use crate::sample::{discover_sampled, SampleConfig};
use crate::upstage::{upstage_side, ProvidedFds, Side, SideOutcome, SideView};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    #[default]
    Selective,
    Sampling,
    Oracle,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Selective => "selective",
            Strategy::Sampling => "sampling",
            Strategy::Oracle => "oracle",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "selective" => Ok(Strategy::Selective),
            "sampling" => Ok(Strategy::Sampling),
            "oracle" => Ok(Strategy::Oracle),
            _ => Err(Error::Config(format!("unknown strategy {s:?}"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct PipelineConfig {
    pub strategy: Strategy,
    /// Error bound for approximate input dependencies; 0 disables them.
    pub epsilon: f64,
    pub sample: SampleConfig,
    /// Largest join the oracle strategy may materialize.
    pub row_limit: u64,
    pub left_fds: Option<ProvidedFds>,
    pub right_fds: Option<ProvidedFds>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            strategy: Strategy::Selective,
            epsilon: 0.0,
            sample: SampleConfig::default(),
            row_limit: DEFAULT_ROW_LIMIT,
            left_fds: None,
            right_fds: None,
        }
    }
}

/// Output of each stage, over the join's ordinals.
#[derive(Clone, Debug, Default)]
pub struct StageOutputs {
    pub preserved_left: FdSet,
    pub preserved_right: FdSet,
    pub upstaged_left: FdSet,
    pub upstaged_right: FdSet,
    /// Inferred and refined dependencies.
    pub inferred: FdSet,
    pub mined: FdSet,
    pub sampled: FdSet,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReportFd {
    pub lhs: Vec<String>,
    pub rhs: String,
    pub error: f64,
    pub origin: Origin,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct ReportCounters {
    #[serde(flatten)]
    pub work: Counters,
    /// Size of the join, counted from key multiplicities.
    pub join_rows: u64,
    pub afds_checked: usize,
    pub afds_promoted: usize,
    pub upstage_candidates_checked: usize,
    pub rows_filtered_left: usize,
    pub rows_filtered_right: usize,
    pub inferred_rejected: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample_rows: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample_size_ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub selected_ids: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub micro_joins: Option<usize>,
    /// Rows of a materialized full join; only the oracle sets it.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub full_join_rows_materialized: Option<u64>,
    /// Rows of intermediate joins materialized by a multi-table chain.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub intermediate_rows_materialized: Option<u64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DiscoveryReport {
    pub schema_version: u32,
    pub strategy: Strategy,
    pub operator: String,
    pub attributes: Vec<String>,
    /// The join is empty, so no dependency is listed.
    pub vacuous: bool,
    pub fds: Vec<ReportFd>,
    pub origin_counts: BTreeMap<String, usize>,
    /// Input dependencies that fail on the join because of null padding.
    pub violated: Vec<FdRecord>,
    pub coverage: CoverageReport,
    pub counters: ReportCounters,
    pub timings_ms: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample: Option<SampleConfig>,
    pub warnings: Vec<String>,
}

impl DiscoveryReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// A run: the report plus the sets behind it.
#[derive(Clone, Debug)]
pub struct JoinDiscovery {
    pub report: DiscoveryReport,
    /// Minimal cover over the join's ordinals, tagged by origin.
    pub fds: FdSet,
    pub stages: StageOutputs,
    pub left: SideOutcome,
    pub right: SideOutcome,
    /// Names of the join's attributes, indexed by ordinal.
    pub attributes: Vec<String>,
}

struct Timer(BTreeMap<String, f64>, Instant);

impl Timer {
    fn new() -> Self {
        Timer(BTreeMap::new(), Instant::now())
    }

    fn lap(&mut self, stage: &str) {
        let now = Instant::now();
        self.0
            .insert(stage.to_owned(), (now - self.1).as_secs_f64() * 1e3);
        self.1 = now;
    }
}

/// Discovers the minimal dependencies of `left ◇ right` with the configured
/// strategy. Natural joins are handled as equi-joins on the common names, so
/// both key columns stay in the schema.
pub fn discover_join_fds(
    left: &Instance,
    right: &Instance,
    spec: &JoinSpec,
    cfg: &PipelineConfig,
) -> Result<JoinDiscovery> {
    spec.validate(left, right)?;
    if !(0.0..1.0).contains(&cfg.epsilon) {
        return Err(Error::Config(format!("epsilon {} outside [0, 1)", cfg.epsilon)));
    }
    let mut warnings = Vec::new();
    let mut spec = spec.clone();
    if spec.merge_keys {
        spec.merge_keys = false;
        warnings.push("natural join evaluated as an equi-join; key columns of both sides are kept".into());
    }
    let spec = &spec;
    let mut timer = Timer::new();
    let attributes = join_schema(left, right, spec);
    let cov = coverage(left, right, spec)?;
    let join_rows = join_row_count(left, right, spec)?;
    timer.lap("coverage");
    let semi = matches!(spec.op, JoinOperator::LeftSemi | JoinOperator::RightSemi);
    let mut counters = ReportCounters {
        join_rows,
        ..ReportCounters::default()
    };

    if cfg.strategy == Strategy::Oracle {
        let out = oracle_join_fds(left, right, spec, cfg.row_limit)?;
        timer.lap("oracle");
        counters.full_join_rows_materialized = Some(out.join_rows);
        let fds = out.fds.retagged(Some(Origin::Mined));
        let report = build_report(
            cfg.strategy,
            spec,
            &attributes,
            out.vacuous,
            &fds,
            &BTreeMap::new(),
            Vec::new(),
            cov,
            counters,
            timer,
            None,
            warnings,
        );
        return Ok(JoinDiscovery {
            report,
            fds,
            stages: StageOutputs::default(),
            left: SideOutcome::default(),
            right: SideOutcome::default(),
            attributes,
        });
    }

    let lv = SideView::build(left, right, spec, Side::Left);
    let rv = SideView::build(left, right, spec, Side::Right);
    let lo = upstage_side(left, &lv, cfg.left_fds.as_ref(), cfg.epsilon)?;
    let ro = upstage_side(right, &rv, cfg.right_fds.as_ref(), cfg.epsilon)?;
    timer.lap("upstage");
    for (o, v) in [(&lo, &lv), (&ro, &rv)] {
        if !o.violated.is_empty() && !v.padded {
            return Err(Error::Invariant(format!(
                "{} input dependencies fail on the join without null padding",
                o.violated.len()
            )));
        }
    }
    counters.afds_checked = lo.stats.afds_checked + ro.stats.afds_checked;
    counters.afds_promoted = lo.stats.afds_promoted + ro.stats.afds_promoted;
    counters.upstage_candidates_checked = lo.stats.candidates_checked + ro.stats.candidates_checked;
    counters.rows_filtered_left = lo.stats.rows_filtered;
    counters.rows_filtered_right = ro.stats.rows_filtered;

    // Ordinal offset of the right side in the output schema.
    let offset = match spec.op {
        JoinOperator::RightSemi => 0,
        _ => left.arity(),
    };
    let mut stages = StageOutputs {
        preserved_left: lo.preserved.clone(),
        preserved_right: ro.preserved.shifted(offset),
        upstaged_left: lo.upstaged.clone(),
        upstaged_right: ro.upstaged.shifted(offset),
        ..StageOutputs::default()
    };
    let mut violated = record_list(&lo.violated, &left.attr_names());
    violated.extend(record_list(&ro.violated, &right.attr_names()));
    let vacuous = join_rows == 0;
    let mut provenance = BTreeMap::new();
    let mut sample_cfg = None;
    let mut fds = FdSet::new();
    if !vacuous {
        let mut all = stages.preserved_left.union(&stages.upstaged_left);
        all.extend(&stages.preserved_right);
        all.extend(&stages.upstaged_right);
        if !semi {
            let mut ctx = JoinContext::new(left, right, spec, lv, rv, &lo, &ro);
            let inferred = infer_join_fds(&mut ctx, &all)?;
            timer.lap("infer");
            counters.inferred_rejected = inferred.rejected;
            stages.inferred = inferred.fds.clone();
            provenance = inferred.provenance;
            all.extend(&stages.inferred);
            match cfg.strategy {
                Strategy::Selective => {
                    stages.mined = discover_selective(&mut ctx, &all)?;
                    timer.lap("mine");
                    all.extend(&stages.mined);
                }
                Strategy::Sampling => {
                    let s = discover_sampled(&ctx, &all, &cfg.sample)?;
                    timer.lap("sample");
                    counters.sample_rows = Some(s.sample_rows);
                    counters.sample_size_ratio = Some(s.sample_rows as f64 / join_rows as f64);
                    counters.selected_ids = Some(s.selected_ids);
                    counters.micro_joins = Some(s.micro_joins);
                    warnings.extend(s.warnings);
                    stages.sampled = s.fds;
                    all.extend(&stages.sampled);
                    sample_cfg = Some(cfg.sample);
                }
                Strategy::Oracle => unreachable!("handled above"),
            }
            counters.work = ctx.counters.clone();
        }
        fds = classify_origins(&all.minimal_cover(), &stages);
        provenance.retain(|fd, _| fds.contains(fd));
    }
    timer.lap("cover");
    let report = build_report(
        cfg.strategy,
        spec,
        &attributes,
        vacuous,
        &fds,
        &provenance,
        violated,
        cov,
        counters,
        timer,
        sample_cfg,
        warnings,
    );
    Ok(JoinDiscovery {
        report,
        fds,
        stages,
        left: lo,
        right: ro,
        attributes,
    })
}

/// Tags each member with the first stage, in pipeline order, whose output
/// contains it; members produced only by reduction keep their merged tag.
pub fn classify_origins(fds: &FdSet, stages: &StageOutputs) -> FdSet {
    let order: [(&FdSet, Origin); 7] = [
        (&stages.preserved_left, Origin::PreservedLeft),
        (&stages.preserved_right, Origin::PreservedRight),
        (&stages.upstaged_left, Origin::UpstagedLeft),
        (&stages.upstaged_right, Origin::UpstagedRight),
        (&stages.inferred, Origin::Inferred),
        (&stages.mined, Origin::Mined),
        (&stages.sampled, Origin::Sampled),
    ];
    let mut out = FdSet::new();
    for (fd, tag) in fds.iter_tagged() {
        let found = order.iter().find(|(s, _)| s.contains(fd)).map(|(s, o)| {
            if *o == Origin::Inferred {
                s.origin(fd).unwrap_or(Origin::Inferred)
            } else {
                *o
            }
        });
        out.insert_tagged(*fd, found.or(tag).or(Some(Origin::Mined)));
    }
    out
}

fn record_list(set: &FdSet, names: &[&str]) -> Vec<FdRecord> {
    set.iter()
        .map(|fd| FdRecord::from_fd(fd, None, 0.0, names))
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn build_report(
    strategy: Strategy,
    spec: &JoinSpec,
    attributes: &[String],
    vacuous: bool,
    fds: &FdSet,
    provenance: &BTreeMap<FunctionalDependency, Provenance>,
    violated: Vec<FdRecord>,
    coverage: CoverageReport,
    counters: ReportCounters,
    timer: Timer,
    sample: Option<SampleConfig>,
    mut warnings: Vec<String>,
) -> DiscoveryReport {
    let mut origin_counts: BTreeMap<String, usize> =
        Origin::ALL.iter().map(|o| (o.as_str().to_owned(), 0)).collect();
    let entries = fds
        .iter_tagged()
        .map(|(fd, o)| {
            let origin = o.unwrap_or(Origin::Mined);
            *origin_counts.entry(origin.as_str().to_owned()).or_default() += 1;
            ReportFd {
                lhs: fd.lhs.iter().map(|a| attributes[a.index()].clone()).collect(),
                rhs: attributes[fd.rhs.index()].clone(),
                error: 0.0,
                origin,
                provenance: provenance.get(fd).cloned(),
            }
        })
        .collect();
    if vacuous {
        warnings.push("the join is empty; every dependency holds vacuously".into());
    }
    DiscoveryReport {
        schema_version: SCHEMA_VERSION,
        strategy,
        operator: spec.op.as_str().to_owned(),
        attributes: attributes.to_vec(),
        vacuous,
        fds: entries,
        origin_counts,
        violated,
        coverage,
        counters,
        timings_ms: timer.0,
        sample,
        warnings,
    }
}

/// Left-deep discovery over `tables[0] ◇ tables[1] ◇ …`. Each intermediate
/// join is materialized and its discovered dependencies are supplied as the
/// left input's dependencies of the next step. `specs[i]` joins the
/// intermediate result with `tables[i + 1]`.
pub fn discover_chain(
    tables: &[Instance],
    specs: &[JoinSpec],
    cfg: &PipelineConfig,
) -> Result<JoinDiscovery> {
    if tables.len() < 2 || specs.len() != tables.len() - 1 {
        return Err(Error::InvalidSpec(format!(
            "{} tables need {} join specifications, got {}",
            tables.len(),
            tables.len().saturating_sub(1),
            specs.len()
        )));
    }
    let mut acc = tables[0].clone();
    let mut step_cfg = cfg.clone();
    let mut intermediate = 0u64;
    for (i, spec) in specs.iter().enumerate() {
        let right = &tables[i + 1];
        let mut run = discover_join_fds(&acc, right, spec, &step_cfg)?;
        if i + 1 == specs.len() {
            if i > 0 {
                run.report.counters.intermediate_rows_materialized = Some(intermediate);
            }
            return Ok(run);
        }
        let mut s = spec.clone();
        s.merge_keys = false;
        acc = join(&acc, right, &s)?;
        intermediate += acc.row_count() as u64;
        step_cfg.left_fds = Some(ProvidedFds {
            exact: if run.report.vacuous {
                vacuous_cover(acc.all_attrs())
            } else {
                run.fds.retagged(None)
            },
            afds: Vec::new(),
        });
        step_cfg.right_fds = None;
    }
    unreachable!("the loop returns on its last step")
}

/// Every attribute constant: the cover of an empty instance.
fn vacuous_cover(attrs: AttrSet) -> FdSet {
    attrs
        .iter()
        .map(|a| FunctionalDependency::new(AttrSet::EMPTY, a))
        .collect()
}
