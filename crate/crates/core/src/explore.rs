//! Component exploration and whole-graph census of `puz[d,k,l]`.
//!
//! Component sizes and counts come from the unlabeled graph: a labeled
//! component over an unlabeled component `U` has `|U| * |H|` configurations,
//! where `H` is the group of token permutations realised by closed walks, and
//! there are `n! / |H|` such components. Diameters come from labeled BFS runs
//! started at one configuration per cube-symmetry class of masks in `U`;
//! eccentricity is invariant under relabeling and under cube symmetries, so
//! this covers every configuration.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::time::Instant;

use log::{info, warn};
use rustc_hash::{FxHashMap, FxHashSet};
use serde::{Deserialize, Serialize};

use crate::config::{canonical_mask, LabeledConfig, Rules};
use crate::dense::{BfsStats, DenseSpace, MAX_DENSE_TOKENS};
use crate::error::{Error, Result};
use crate::formulas::binomial;
use crate::moves::MoveEngine;
use crate::perm::factorial;
use crate::unlabeled::{all_components, loop_group, unlabeled_component, MaskSpace, UnlabeledComponent};

/// Components at most this large get an all-pairs diameter in auto mode.
pub const ALL_PAIRS_MAX: u128 = 1_000;
/// Default cap on the dense state space (bits per bitset).
pub const DEFAULT_STATE_BUDGET: u64 = 5_000_000_000;
/// Default cap on total states swept by exact diameter runs.
pub const DEFAULT_EXACT_WORK: u64 = 4_000_000_000;
/// Default cap on unlabeled masks enumerated by a census.
pub const DEFAULT_MASK_BUDGET: u64 = 50_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CensusMode {
    /// Labeled BFS over every configuration.
    Full,
    /// Unlabeled components and their loop groups, one per symmetry class.
    OrbitReduced,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiameterMode {
    Auto,
    ExactAllPairs,
    ExactOrbit,
    Bound,
    Skip,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Isolated,
    SemiIsolated,
    StrongParity,
    Connected,
    /// More than two mobile components; never observed.
    MultipleMobile,
    /// Parity evidence bounds the mobile components by two without
    /// deciding between one and two.
    AtMostTwo,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("serializable");
        write!(f, "{}", s.as_str().expect("string"))
    }
}

#[derive(Clone, Debug)]
pub struct CensusOptions {
    pub mode: CensusMode,
    pub diameter: DiameterMode,
    pub state_budget: u64,
    pub exact_work: u64,
    pub mask_budget: u64,
    pub timings: bool,
}

impl Default for CensusOptions {
    fn default() -> Self {
        CensusOptions {
            mode: CensusMode::OrbitReduced,
            diameter: DiameterMode::Auto,
            state_budget: DEFAULT_STATE_BUDGET,
            exact_work: DEFAULT_EXACT_WORK,
            mask_budget: DEFAULT_MASK_BUDGET,
            timings: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusReport {
    pub d: u32,
    pub k: u32,
    pub l: u32,
    pub total_configs: u128,
    pub biggest_component: u128,
    pub diameter_lo: Option<u32>,
    pub diameter_hi: Option<u32>,
    pub regime: Regime,
    pub num_max_components: u128,
    pub bfs_depth_f: Option<u32>,
    pub runtime_ms: Option<u64>,
    pub diameter_method: String,
    /// Smallest eccentricity seen in exact runs.
    pub radius: Option<u32>,
    /// `f + 3`, an empirical upper bound reported beside the proven one.
    pub empirical_hi: Option<u32>,
    /// Whether diameter <= radius + 3 on exact rows.
    pub f_plus_3_holds: Option<bool>,
    pub mobile_components: u128,
    pub semi_isolated_components: u128,
    pub isolated_components: u128,
    pub unlabeled_components: u64,
}

impl CensusReport {
    pub fn diameter_exact(&self) -> Option<u32> {
        match (self.diameter_lo, self.diameter_hi) {
            (Some(a), Some(b)) if a == b => Some(a),
            _ => None,
        }
    }

    pub const CSV_HEADER: &'static str = "d,k,l,total_configs,biggest_component,diameter_lo,diameter_hi,regime,num_max_components,bfs_depth_f,runtime_ms";

    pub fn csv_row(&self) -> String {
        let opt = |x: Option<u32>| x.map(|v| v.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.d,
            self.k,
            self.l,
            self.total_configs,
            self.biggest_component,
            opt(self.diameter_lo),
            opt(self.diameter_hi),
            self.regime,
            self.num_max_components,
            opt(self.bfs_depth_f),
            self.runtime_ms.map(|v| v.to_string()).unwrap_or_default()
        )
    }
}

/// Total number of labeled configurations `C(2^d, l) * (2^d - l)!`.
pub fn total_configs(rules: &Rules) -> u128 {
    binomial(rules.vertices() as u64, rules.l as u64) as u128 * factorial(rules.tokens())
}

/// Result of a hash-set BFS over one labeled component.
#[derive(Clone, Debug)]
pub struct ComponentExploration {
    /// Configurations in BFS order.
    pub configs: Vec<LabeledConfig>,
    pub stats: BfsStats,
    pub truncated: bool,
}

/// Breadth-first search from `start`, stopping after `budget` states.
pub fn explore_component(engine: &MoveEngine, start: LabeledConfig, budget: u64) -> ComponentExploration {
    let mut seen: FxHashSet<LabeledConfig> = FxHashSet::default();
    seen.insert(start);
    let mut configs = vec![start];
    let mut level_sizes = vec![1u64];
    let mut level_start = 0;
    let mut truncated = false;
    'levels: while level_start < configs.len() {
        let level_end = configs.len();
        for i in level_start..level_end {
            let c = configs[i];
            for m in engine.legal_moves(&c) {
                let next = engine.apply_unchecked(&c, m.from, m.to);
                if seen.insert(next) {
                    if configs.len() as u64 >= budget {
                        truncated = true;
                        break 'levels;
                    }
                    configs.push(next);
                }
            }
        }
        if configs.len() > level_end {
            level_sizes.push((configs.len() - level_end) as u64);
        }
        level_start = level_end;
    }
    let stats = BfsStats {
        visited: configs.len() as u64,
        max_depth: level_sizes.len() as u32 - 1,
        frontier_peak: level_sizes.iter().copied().max().unwrap_or(0),
        level_sizes,
    };
    ComponentExploration { configs, stats, truncated }
}

/// Eccentricity of `start` by hash-set BFS.
pub fn eccentricity(engine: &MoveEngine, start: LabeledConfig) -> u32 {
    explore_component(engine, start, u64::MAX).stats.max_depth
}

/// Per symmetry class of unlabeled components: shared numbers.
#[derive(Clone, Debug)]
struct ClassInfo {
    unlabeled_size: u64,
    labeled_size: u128,
    /// Labeled components over one unlabeled component.
    per_unlabeled: u128,
    kind: ComponentKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum ComponentKind {
    Isolated,
    SemiIsolated,
    Mobile,
}

fn component_kind(comp: &UnlabeledComponent) -> ComponentKind {
    if comp.is_isolated() {
        ComponentKind::Isolated
    } else if comp.is_mobile() {
        ComponentKind::Mobile
    } else {
        ComponentKind::SemiIsolated
    }
}

/// Smallest canonical mask in the component: equal for components related by
/// a cube symmetry.
fn signature(comp: &UnlabeledComponent) -> u64 {
    comp.masks.iter().map(|&m| canonical_mask(comp.d, m)).min().expect("nonempty")
}

/// First mask of the component in each cube-symmetry class.
fn orbit_representatives(comp: &UnlabeledComponent) -> Vec<u64> {
    let mut sorted = comp.masks.clone();
    sorted.sort_unstable();
    let mut by_class: BTreeMap<u64, u64> = BTreeMap::new();
    for m in sorted {
        by_class.entry(canonical_mask(comp.d, m)).or_insert(m);
    }
    by_class.into_values().collect()
}

/// Distances from `root` in the unlabeled graph; the largest is a lower
/// bound for labeled eccentricities at `root`.
fn unlabeled_eccentricity(engine: &MoveEngine, root: u64) -> u32 {
    unlabeled_component(engine, root).eccentricity_of_root()
}

struct DiameterResult {
    lo: u32,
    hi: u32,
    f: u32,
    radius: Option<u32>,
    method: &'static str,
}

/// Run a census of `puz[d,k,l]`.
pub fn census(rules: Rules, opts: &CensusOptions) -> Result<CensusReport> {
    let started = Instant::now();
    let engine = MoveEngine::for_rules(&rules)?;
    let n = rules.tokens();
    let space = MaskSpace::new(rules.vertices(), n);
    if space.count() > opts.mask_budget {
        return Err(Error::Budget(opts.mask_budget));
    }
    let comps = all_components(&engine, n);
    let mut classes: FxHashMap<u64, ClassInfo> = FxHashMap::default();
    let mut comp_class: Vec<u64> = Vec::with_capacity(comps.len());
    for comp in &comps {
        if comp.is_isolated() {
            comp_class.push(u64::MAX);
            continue;
        }
        let sig = signature(comp);
        comp_class.push(sig);
        if classes.contains_key(&sig) {
            continue;
        }
        let info = match opts.mode {
            CensusMode::OrbitReduced => {
                let g = loop_group(&engine, comp);
                let order = g.order.ok_or_else(|| Error::Infeasible("group order overflows".into()))?;
                let per = g
                    .labeled_components()
                    .ok_or_else(|| Error::Infeasible("component count overflows".into()))?;
                ClassInfo {
                    unlabeled_size: comp.len() as u64,
                    labeled_size: order * comp.len() as u128,
                    per_unlabeled: per,
                    kind: component_kind(comp),
                }
            }
            CensusMode::Full => full_class_info(&engine, comp, opts)?,
        };
        classes.insert(sig, info);
    }

    let fact_n = factorial(n);
    let mut biggest = 0u128;
    let mut counts = [0u128; 3];
    let mut sizes: Vec<(u128, u128, usize)> = Vec::with_capacity(comps.len());
    for (i, comp) in comps.iter().enumerate() {
        let (size, count, kind) = if comp.is_isolated() {
            (1, fact_n, ComponentKind::Isolated)
        } else {
            let c = &classes[&comp_class[i]];
            debug_assert_eq!(c.unlabeled_size, comp.len() as u64);
            (c.labeled_size, c.per_unlabeled, c.kind)
        };
        counts[kind as usize] += count;
        biggest = biggest.max(size);
        sizes.push((size, count, i));
    }
    let num_max: u128 = sizes.iter().filter(|s| s.0 == biggest).map(|s| s.1).sum();
    let [isolated, semi, mobile] = counts;
    let regime = match mobile {
        0 if semi == 0 => Regime::Isolated,
        0 => Regime::SemiIsolated,
        1 => Regime::Connected,
        2 => Regime::StrongParity,
        _ => Regime::MultipleMobile,
    };

    // one unlabeled component per symmetry class attaining the maximum
    let mut targets: Vec<&UnlabeledComponent> = Vec::new();
    let mut done: FxHashSet<u64> = FxHashSet::default();
    for &(size, _, i) in &sizes {
        if size == biggest && done.insert(comp_class[i]) {
            targets.push(&comps[i]);
        }
    }
    let mut diam: Option<DiameterResult> = None;
    let mut out_of_budget = false;
    if opts.diameter != DiameterMode::Skip {
        for comp in targets {
            let r = match component_diameter(&engine, comp, biggest, opts) {
                Ok(r) => r,
                Err(Error::Budget(_)) | Err(Error::Infeasible(_)) => {
                    warn!("{rules}: diameter out of budget");
                    out_of_budget = true;
                    diam = None;
                    break;
                }
                Err(e) => return Err(e),
            };
            diam = Some(match diam {
                None => r,
                Some(prev) => DiameterResult {
                    lo: prev.lo.max(r.lo),
                    hi: prev.hi.max(r.hi),
                    f: prev.f,
                    radius: match (prev.radius, r.radius) {
                        (Some(a), Some(b)) => Some(a.min(b)),
                        _ => None,
                    },
                    method: if prev.method == r.method { r.method } else { "mixed" },
                },
            });
        }
    }

    let (lo, hi, f, radius, method) = match &diam {
        Some(r) => (Some(r.lo), Some(r.hi), Some(r.f), r.radius, r.method.to_string()),
        None if out_of_budget => (None, None, None, None, "unknown".to_string()),
        None => (None, None, None, None, "skipped".to_string()),
    };
    let exact = lo.is_some() && lo == hi;
    let f_plus_3_holds = match (exact, radius, hi) {
        (true, Some(rad), Some(h)) => Some(h <= rad + 3),
        _ => None,
    };
    if let Some(false) = f_plus_3_holds {
        warn!("{rules}: diameter {} exceeds smallest eccentricity {} by more than 3", hi.unwrap(), radius.unwrap());
    } else if f_plus_3_holds == Some(true) {
        info!("{rules}: diameter {} within 3 of every BFS depth (min {})", hi.unwrap(), radius.unwrap());
    }
    Ok(CensusReport {
        d: rules.d,
        k: rules.k,
        l: rules.l,
        total_configs: total_configs(&rules),
        biggest_component: biggest,
        diameter_lo: lo,
        diameter_hi: hi,
        regime,
        num_max_components: num_max,
        bfs_depth_f: f,
        runtime_ms: opts.timings.then(|| started.elapsed().as_millis() as u64),
        diameter_method: method,
        radius,
        empirical_hi: if exact { None } else { f.map(|f| f + 3) },
        f_plus_3_holds,
        mobile_components: mobile,
        semi_isolated_components: semi,
        isolated_components: isolated,
        unlabeled_components: comps.len() as u64,
    })
}

/// Labeled census of one unlabeled component by exhaustive BFS.
fn full_class_info(engine: &MoveEngine, comp: &UnlabeledComponent, opts: &CensusOptions) -> Result<ClassInfo> {
    let n = comp.tokens();
    let states = DenseSpace::states_for(comp.len(), n);
    if n > MAX_DENSE_TOKENS || states > opts.state_budget {
        return Err(Error::Budget(opts.state_budget));
    }
    let mut space = DenseSpace::new(engine, &comp.masks)?;
    let parts = space.component_census();
    let size = parts[0].1;
    if parts.iter().any(|p| p.1 != size) {
        return Err(Error::Infeasible("labeled components over one unlabeled component differ in size".into()));
    }
    Ok(ClassInfo {
        unlabeled_size: comp.len() as u64,
        labeled_size: size as u128,
        per_unlabeled: parts.len() as u128,
        kind: component_kind(comp),
    })
}

/// Eccentricity of the standard labeling of `mask`, using the dense engine
/// when it fits and hash-set BFS otherwise.
struct EccRunner<'a> {
    engine: &'a MoveEngine,
    dense: Option<DenseSpace>,
}

impl<'a> EccRunner<'a> {
    fn new(engine: &'a MoveEngine, comp: &UnlabeledComponent, labeled: u128, opts: &CensusOptions) -> Result<Self> {
        let n = comp.tokens();
        let states = DenseSpace::states_for(comp.len(), n);
        // hash-set BFS is fine for small components and required above the
        // dense token limit
        let use_dense = n <= MAX_DENSE_TOKENS && labeled > 20_000 && states <= opts.state_budget;
        if !use_dense && labeled > 2_000_000 {
            return Err(Error::Budget(opts.state_budget));
        }
        let dense = if use_dense { Some(DenseSpace::new(engine, &comp.masks)?) } else { None };
        Ok(EccRunner { engine, dense })
    }

    fn ecc(&mut self, cfg: LabeledConfig) -> Result<u32> {
        match &mut self.dense {
            Some(space) => {
                let s = space.state_of(&cfg)?;
                Ok(space.bfs(s).max_depth)
            }
            None => Ok(eccentricity(self.engine, cfg)),
        }
    }
}

fn component_diameter(
    engine: &MoveEngine,
    comp: &UnlabeledComponent,
    labeled: u128,
    opts: &CensusOptions,
) -> Result<DiameterResult> {
    let d = engine.d();
    if comp.is_isolated() {
        return Ok(DiameterResult { lo: 0, hi: 0, f: 0, radius: Some(0), method: "exact-trivial" });
    }
    let reps = orbit_representatives(comp);
    let mode = match opts.diameter {
        DiameterMode::Auto => {
            let states = DenseSpace::states_for(comp.len(), comp.tokens()) as u128;
            let sweep = if comp.tokens() <= MAX_DENSE_TOKENS && labeled > 20_000 { states } else { labeled };
            if labeled <= ALL_PAIRS_MAX {
                DiameterMode::ExactAllPairs
            } else if sweep * reps.len() as u128 <= opts.exact_work as u128 {
                DiameterMode::ExactOrbit
            } else {
                DiameterMode::Bound
            }
        }
        m => m,
    };
    let root = LabeledConfig::from_mask(d, comp.root())?;
    match mode {
        DiameterMode::ExactAllPairs => {
            if labeled > 10 * ALL_PAIRS_MAX {
                return Err(Error::Budget((10 * ALL_PAIRS_MAX) as u64));
            }
            let all = explore_component(engine, root, u64::MAX).configs;
            let eccs: Vec<u32> = all.iter().map(|&c| eccentricity(engine, c)).collect();
            let f = eccs[0];
            let hi = *eccs.iter().max().expect("nonempty");
            let lo = *eccs.iter().min().expect("nonempty");
            Ok(DiameterResult { lo: hi, hi, f, radius: Some(lo), method: "exact-all-pairs" })
        }
        DiameterMode::ExactOrbit => {
            let mut runner = EccRunner::new(engine, comp, labeled, opts)?;
            let mut f = None;
            let (mut lo, mut hi) = (u32::MAX, 0);
            for &m in &reps {
                let e = runner.ecc(LabeledConfig::from_mask(d, m)?)?;
                if m == comp.root() {
                    f = Some(e);
                }
                lo = lo.min(e);
                hi = hi.max(e);
            }
            let f = match f {
                Some(f) => f,
                None => runner.ecc(root)?,
            };
            Ok(DiameterResult { lo: hi, hi, f, radius: Some(lo), method: "exact-orbit" })
        }
        DiameterMode::Bound => {
            let mut runner = EccRunner::new(engine, comp, labeled, opts)?;
            let f = runner.ecc(root)?;
            let unlabeled_lo = reps.iter().map(|&m| unlabeled_eccentricity(engine, m)).max().unwrap_or(0);
            Ok(DiameterResult { lo: f.max(unlabeled_lo), hi: 2 * f, f, radius: None, method: "bound" })
        }
        DiameterMode::Auto | DiameterMode::Skip => unreachable!("resolved above"),
    }
}

/// Classes of the unlabeled graph at one `l`, for quick summaries.
pub fn unlabeled_summary(rules: Rules) -> Result<Vec<(u64, usize, bool)>> {
    let engine = MoveEngine::for_rules(&rules)?;
    let comps = all_components(&engine, rules.tokens());
    Ok(comps.iter().map(|c| (c.root(), c.len(), c.is_mobile() && !c.is_isolated())).collect())
}

/// Number of unlabeled components containing mobile configurations.
pub fn mobile_unlabeled_components(rules: Rules) -> Result<usize> {
    Ok(unlabeled_summary(rules)?.iter().filter(|c| c.2).count())
}

/// Distances from one configuration to every configuration in its component
/// (hash-set BFS).
pub fn distances_from(engine: &MoveEngine, start: LabeledConfig) -> FxHashMap<LabeledConfig, u32> {
    let mut dist = FxHashMap::default();
    dist.insert(start, 0);
    let mut queue = VecDeque::from([start]);
    while let Some(c) = queue.pop_front() {
        let dc = dist[&c];
        for m in engine.legal_moves(&c) {
            let next = engine.apply_unchecked(&c, m.from, m.to);
            dist.entry(next).or_insert_with(|| {
                queue.push_back(next);
                dc + 1
            });
        }
    }
    dist
}
