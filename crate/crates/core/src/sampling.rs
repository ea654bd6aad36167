//! Patch selection from an [`ImportanceMap`].
//!
//! Candidates are ranked by informativeness (lowest PSNR first, or highest
//! value for the HR-only heuristics), ties broken by `(u, v)` ascending. Every
//! strategy returns entries in that order.
//!
//! - Greedy: the top `n` anchors, overlap allowed.
//! - NMS: walk the ranking, keep an anchor if its IoU with every kept anchor is
//!   at most the threshold.
//! - Dart: throw seeded uniform darts at the anchor grid, keep darts disjoint
//!   from all earlier darts until `max_attempts` consecutive misses, then keep
//!   the `n` most informative darts.

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::importance::{informativeness, ImportanceMap, MetricKind};
use crate::rng::XorShift64Star;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Strategy {
    Greedy,
    Nms,
    Dart,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Greedy, Strategy::Nms, Strategy::Dart];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Greedy => "greedy",
            Strategy::Nms => "nms",
            Strategy::Dart => "dart",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.name() == name)
    }
}

impl core::fmt::Display for Strategy {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.name())
    }
}

/// How many patches to take from one image.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Budget {
    /// Fraction of the anchor grid, in (0, 1].
    Portion(f64),
    /// Explicit count, at least 1; capped at the grid size.
    Count(usize),
}

impl Budget {
    pub fn resolve(&self, total_anchors: usize) -> Result<usize> {
        match *self {
            Budget::Portion(p) => resolve_count(p, total_anchors),
            Budget::Count(0) => Err(Error::InvalidCount),
            Budget::Count(_) if total_anchors == 0 => Err(Error::EmptyGrid),
            Budget::Count(n) => Ok(n.min(total_anchors)),
        }
    }
}

/// `max(1, floor(p * total))`.
///
/// Products within `1e-9` (relative) of an integer count as that integer, so
/// `0.29 * 100` gives 29 despite binary rounding.
pub fn resolve_count(p: f64, total_anchors: usize) -> Result<usize> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidPortion(p));
    }
    if total_anchors == 0 {
        return Err(Error::EmptyGrid);
    }
    let x = p * total_anchors as f64;
    let nearest = libm::round(x);
    let whole = if (x - nearest).abs() <= 1e-9 * nearest.max(1.0) { nearest } else { libm::floor(x) };
    Ok((whole as usize).clamp(1, total_anchors))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SamplingConfig {
    pub strategy: Strategy,
    pub budget: Budget,
    /// Largest IoU an NMS-accepted patch may have with an earlier one; in [0, 1).
    pub nms_iou_threshold: f64,
    /// Consecutive rejected darts before throwing stops; default `10 * count`.
    pub dart_max_attempts: Option<usize>,
    pub seed: u64,
}

impl SamplingConfig {
    pub fn new(strategy: Strategy, budget: Budget) -> Self {
        Self { strategy, budget, nms_iou_threshold: 0.0, dart_max_attempts: None, seed: 0 }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_iou_threshold(mut self, threshold: f64) -> Self {
        self.nms_iou_threshold = threshold;
        self
    }

    pub fn with_max_attempts(mut self, attempts: usize) -> Self {
        self.dart_max_attempts = Some(attempts);
        self
    }

    fn validate(&self) -> Result<()> {
        let t = self.nms_iou_threshold;
        if !(0.0..1.0).contains(&t) {
            return Err(Error::InvalidThreshold(t));
        }
        if self.dart_max_attempts == Some(0) {
            return Err(Error::InvalidCount);
        }
        Ok(())
    }
}

/// A scored anchor. `key` is the polarity-adjusted score: larger is more informative.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PatchCandidate {
    pub u: usize,
    pub v: usize,
    pub score: f32,
    pub key: f32,
}

impl PatchCandidate {
    pub fn new(u: usize, v: usize, score: f32, metric: MetricKind) -> Self {
        // + 0.0 folds -0.0 into +0.0 so total_cmp sees one zero
        Self { u, v, score, key: informativeness(metric, score) + 0.0 }
    }
}

/// Most informative first, then `(u, v)` ascending.
pub fn by_informativeness(a: &PatchCandidate, b: &PatchCandidate) -> Ordering {
    b.key.total_cmp(&a.key).then_with(|| (a.u, a.v).cmp(&(b.u, b.v)))
}

/// Intersection over union of two `k x k` squares anchored at `a` and `b`.
pub fn iou(a: (usize, usize), b: (usize, usize), k: usize) -> f64 {
    let overlap = |p: usize, q: usize| k.saturating_sub(p.abs_diff(q));
    let inter = (overlap(a.0, b.0) * overlap(a.1, b.1)) as f64;
    let area = (k * k) as f64;
    inter / (2.0 * area - inter)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ManifestEntry {
    pub u: usize,
    pub v: usize,
    pub lr_u: usize,
    pub lr_v: usize,
    pub score: f32,
}

/// Ordered selection for one image plus the settings that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct Manifest {
    pub image: String,
    pub hr_path: String,
    pub lr_path: String,
    pub scale: usize,
    pub patch_size: usize,
    pub stride: usize,
    pub metric: MetricKind,
    pub strategy: Strategy,
    pub budget: Budget,
    /// Resolved count; NMS and dart may return fewer entries.
    pub requested: usize,
    pub seed: u64,
    pub nms_iou_threshold: f64,
    pub dart_max_attempts: usize,
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn with_source(mut self, image: &str, hr_path: &str, lr_path: &str) -> Self {
        self.image = image.into();
        self.hr_path = hr_path.into();
        self.lr_path = lr_path.into();
        self
    }
}

/// Runs the strategy named in `cfg`.
pub fn sample(map: &ImportanceMap, cfg: &SamplingConfig) -> Result<Manifest> {
    match cfg.strategy {
        Strategy::Greedy => sample_greedy(map, cfg),
        Strategy::Nms => sample_nms(map, cfg),
        Strategy::Dart => sample_dart(map, cfg),
    }
}

struct Plan {
    count: usize,
    attempts: usize,
}

fn plan(map: &ImportanceMap, cfg: &SamplingConfig) -> Result<Plan> {
    cfg.validate()?;
    if map.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let geom = map.geometry();
    let (stride, scale) = (geom.stride(), geom.scale().get());
    if stride % scale != 0 {
        return Err(Error::UnalignedStride { stride, scale });
    }
    let count = cfg.budget.resolve(map.len())?;
    let attempts = cfg.dart_max_attempts.unwrap_or(10 * count);
    Ok(Plan { count, attempts })
}

fn candidates(map: &ImportanceMap) -> Vec<PatchCandidate> {
    let metric = map.metric();
    map.scores()
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            let (u, v) = map.anchor(i);
            PatchCandidate::new(u, v, s, metric)
        })
        .collect()
}

fn finish(map: &ImportanceMap, cfg: &SamplingConfig, plan: &Plan, picked: Vec<PatchCandidate>) -> Manifest {
    let geom = map.geometry();
    let s = geom.scale().get();
    Manifest {
        image: String::new(),
        hr_path: String::new(),
        lr_path: String::new(),
        scale: s,
        patch_size: geom.patch_size(),
        stride: geom.stride(),
        metric: map.metric(),
        strategy: cfg.strategy,
        budget: cfg.budget,
        requested: plan.count,
        seed: cfg.seed,
        nms_iou_threshold: cfg.nms_iou_threshold,
        dart_max_attempts: plan.attempts,
        entries: picked
            .into_iter()
            .map(|c| ManifestEntry { u: c.u, v: c.v, lr_u: c.u / s, lr_v: c.v / s, score: c.score })
            .collect(),
    }
}

/// The resolved number of most informative anchors.
pub fn sample_greedy(map: &ImportanceMap, cfg: &SamplingConfig) -> Result<Manifest> {
    let plan = plan(map, cfg)?;
    let mut cands = candidates(map);
    if plan.count < cands.len() {
        cands.select_nth_unstable_by(plan.count - 1, by_informativeness);
        cands.truncate(plan.count);
    }
    cands.sort_unstable_by(by_informativeness);
    Ok(finish(map, cfg, &plan, cands))
}

/// Greedy walk that skips anchors overlapping an accepted one by more than the IoU threshold.
pub fn sample_nms(map: &ImportanceMap, cfg: &SamplingConfig) -> Result<Manifest> {
    let plan = plan(map, cfg)?;
    let mut cands = candidates(map);
    cands.sort_unstable_by(by_informativeness);
    let mut occupied = Occupancy::new(map);
    let mut picked = Vec::with_capacity(plan.count);
    for c in cands {
        if picked.len() == plan.count {
            break;
        }
        if !occupied.exceeds(c.u, c.v, cfg.nms_iou_threshold) {
            occupied.insert(c.u, c.v);
            picked.push(c);
        }
    }
    Ok(finish(map, cfg, &plan, picked))
}

/// Seeded dart throwing for disjoint candidates, pruned to the most informative.
pub fn sample_dart(map: &ImportanceMap, cfg: &SamplingConfig) -> Result<Manifest> {
    let plan = plan(map, cfg)?;
    let metric = map.metric();
    let mut rng = XorShift64Star::new(cfg.seed);
    let mut occupied = Occupancy::new(map);
    let mut darts = Vec::new();
    let mut misses = 0;
    while misses < plan.attempts && darts.len() < map.len() {
        let index = rng.below(map.len());
        let (u, v) = map.anchor(index);
        if occupied.exceeds(u, v, 0.0) {
            misses += 1;
        } else {
            occupied.insert(u, v);
            darts.push(PatchCandidate::new(u, v, map.scores()[index], metric));
            misses = 0;
        }
    }
    darts.sort_unstable_by(by_informativeness);
    darts.truncate(plan.count);
    Ok(finish(map, cfg, &plan, darts))
}

/// Accepted anchors bucketed into `k x k` cells; only the 3x3 neighbouring
/// cells can hold an overlapping patch.
struct Occupancy {
    k: usize,
    cell_cols: usize,
    cells: Vec<Vec<(usize, usize)>>,
}

impl Occupancy {
    fn new(map: &ImportanceMap) -> Self {
        let k = map.geometry().patch_size();
        let (max_u, max_v) = map.anchor(map.len() - 1);
        let cell_rows = max_u / k + 1;
        let cell_cols = max_v / k + 1;
        Self { k, cell_cols, cells: alloc::vec![Vec::new(); cell_rows * cell_cols] }
    }

    fn insert(&mut self, u: usize, v: usize) {
        self.cells[(u / self.k) * self.cell_cols + v / self.k].push((u, v));
    }

    /// Whether any accepted anchor has IoU above `threshold` with `(u, v)`.
    fn exceeds(&self, u: usize, v: usize, threshold: f64) -> bool {
        let cell_rows = self.cells.len() / self.cell_cols;
        let (cr, cc) = (u / self.k, v / self.k);
        for r in cr.saturating_sub(1)..=(cr + 1).min(cell_rows - 1) {
            for c in cc.saturating_sub(1)..=(cc + 1).min(self.cell_cols - 1) {
                for &other in &self.cells[r * self.cell_cols + c] {
                    if iou((u, v), other, self.k) > threshold {
                        return true;
                    }
                }
            }
        }
        false
    }
}

#[cfg(test)]
mod tests {
    use super::Strategy;
    use super::*;
    use crate::{PatchGeometry, ScaleFactor};
    use alloc::vec;
    use proptest::prelude::*;
    use proptest::strategy::Strategy as _;

    fn map_from(
        rows: usize,
        cols: usize,
        k: usize,
        stride: usize,
        metric: MetricKind,
        scores: Vec<f32>,
    ) -> ImportanceMap {
        let g = PatchGeometry::new(k, stride, ScaleFactor::new(2).unwrap()).unwrap();
        ImportanceMap::new(rows, cols, g, metric, scores).unwrap()
    }

    fn anchors(m: &Manifest) -> Vec<(usize, usize)> {
        m.entries.iter().map(|e| (e.u, e.v)).collect()
    }

    #[test]
    fn resolve_count_cases() {
        assert_eq!(resolve_count(1.0, 1000).unwrap(), 1000);
        assert_eq!(resolve_count(0.1, 1000).unwrap(), 100);
        assert_eq!(resolve_count(1e-6, 600_000).unwrap(), 1);
        assert_eq!(resolve_count(0.29, 100).unwrap(), 29);
        assert_eq!(resolve_count(0.0, 10), Err(Error::InvalidPortion(0.0)));
        assert!(resolve_count(1.5, 10).is_err());
        assert!(resolve_count(f64::NAN, 10).is_err());
        assert_eq!(resolve_count(0.5, 0), Err(Error::EmptyGrid));
        assert_eq!(Budget::Count(50).resolve(7).unwrap(), 7);
        assert_eq!(Budget::Count(0).resolve(7), Err(Error::InvalidCount));
    }

    #[test]
    fn iou_cases() {
        assert_eq!(iou((4, 6), (4, 6), 8), 1.0);
        assert_eq!(iou((0, 0), (0, 8), 8), 0.0);
        assert_eq!(iou((0, 0), (100, 300), 8), 0.0);
        // (96 * 192) / (2 * 192^2 - 96 * 192)
        assert!((iou((0, 0), (0, 96), 192) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn greedy_full_selection_is_sorted() {
        let scores = vec![30.0, 10.0, 20.0, f32::INFINITY, 10.0, 25.0];
        let m = map_from(2, 3, 4, 2, MetricKind::PsnrBilinear, scores);
        let cfg = SamplingConfig::new(Strategy::Greedy, Budget::Portion(1.0));
        let out = sample_greedy(&m, &cfg).unwrap();
        assert_eq!(anchors(&out), vec![(0, 2), (2, 2), (0, 4), (2, 4), (0, 0), (2, 0)]);
        assert_eq!(out.entries[5].score, f32::INFINITY);
        assert_eq!(out.entries[0].lr_v, 1);
    }

    #[test]
    fn greedy_top_three_matches_full_sort() {
        let scores: Vec<f32> = (0..20).map(|i| ((i * 7) % 20) as f32).collect();
        let m = map_from(4, 5, 4, 2, MetricKind::PsnrBilinear, scores.clone());
        let cfg = SamplingConfig::new(Strategy::Greedy, Budget::Count(3));
        let got: Vec<f32> = sample_greedy(&m, &cfg).unwrap().entries.iter().map(|e| e.score).collect();
        let mut sorted = scores;
        sorted.sort_by(f32::total_cmp);
        assert_eq!(got, sorted[..3]);
        // higher-is-better metrics flip the order
        let m = map_from(1, 4, 4, 2, MetricKind::Std0, vec![1.0, 4.0, 3.0, 2.0]);
        let got: Vec<f32> = sample_greedy(&m, &cfg).unwrap().entries.iter().map(|e| e.score).collect();
        assert_eq!(got, vec![4.0, 3.0, 2.0]);
    }

    #[test]
    fn greedy_ties_break_lexicographically() {
        let m = map_from(3, 3, 4, 2, MetricKind::PsnrBilinear, vec![5.0; 9]);
        let cfg = SamplingConfig::new(Strategy::Greedy, Budget::Count(2));
        assert_eq!(anchors(&sample_greedy(&m, &cfg).unwrap()), vec![(0, 0), (0, 2)]);
    }

    #[test]
    fn nms_suppresses_overlap() {
        // k = 192 anchors (0, 0) and (0, 96); the second is weaker
        let m = map_from(1, 2, 192, 96, MetricKind::PsnrBilinear, vec![20.0, 25.0]);
        let cfg = SamplingConfig::new(Strategy::Nms, Budget::Count(2));
        let out = sample_nms(&m, &cfg).unwrap();
        assert_eq!(anchors(&out), vec![(0, 0)]);
        assert_eq!(out.requested, 2);
        let loose = cfg.clone().with_iou_threshold(0.5);
        assert_eq!(anchors(&sample_nms(&m, &loose).unwrap()), vec![(0, 0), (0, 96)]);
    }

    #[test]
    fn nms_near_one_threshold_is_greedy() {
        let scores: Vec<f32> = (0..30).map(|i| ((i * 11) % 30) as f32).collect();
        let m = map_from(5, 6, 8, 2, MetricKind::PsnrBilinear, scores);
        let cfg = SamplingConfig::new(Strategy::Nms, Budget::Portion(1.0)).with_iou_threshold(1.0 - 1e-9);
        let greedy = SamplingConfig::new(Strategy::Greedy, Budget::Portion(1.0));
        assert_eq!(sample_nms(&m, &cfg).unwrap().entries, sample_greedy(&m, &greedy).unwrap().entries);
    }

    #[test]
    fn nms_disjoint_grid_accepts_all() {
        // stride == k, so no two anchors overlap
        let m = map_from(3, 3, 4, 4, MetricKind::PsnrBilinear, (0..9).map(|i| i as f32).collect());
        for t in [0.0, 0.3, 0.99] {
            let cfg = SamplingConfig::new(Strategy::Nms, Budget::Portion(1.0)).with_iou_threshold(t);
            assert_eq!(sample_nms(&m, &cfg).unwrap().entries.len(), 9);
        }
    }

    #[test]
    fn dart_is_deterministic_and_disjoint() {
        let scores: Vec<f32> = (0..400).map(|i| ((i * 37) % 101) as f32).collect();
        let m = map_from(20, 20, 8, 2, MetricKind::PsnrBilinear, scores);
        let cfg = SamplingConfig::new(Strategy::Dart, Budget::Count(6)).with_seed(9);
        let a = sample_dart(&m, &cfg).unwrap();
        let b = sample_dart(&m, &cfg).unwrap();
        assert_eq!(a, b);
        assert!(!a.entries.is_empty() && a.entries.len() <= 6);
        for (i, x) in a.entries.iter().enumerate() {
            for y in &a.entries[i + 1..] {
                assert_eq!(iou((x.u, x.v), (y.u, y.v), 8), 0.0);
            }
        }
        let other = sample_dart(&m, &cfg.clone().with_seed(10)).unwrap();
        assert_ne!(anchors(&a), anchors(&other));
    }

    #[test]
    fn dart_single_anchor() {
        let m = map_from(1, 1, 8, 2, MetricKind::PsnrBilinear, vec![3.0]);
        for seed in [0, 1, u64::MAX] {
            let cfg = SamplingConfig::new(Strategy::Dart, Budget::Portion(1.0)).with_seed(seed);
            assert_eq!(anchors(&sample_dart(&m, &cfg).unwrap()), vec![(0, 0)]);
        }
    }

    #[test]
    fn config_and_map_errors() {
        let m = map_from(1, 2, 4, 2, MetricKind::PsnrBilinear, vec![1.0, 2.0]);
        let bad = SamplingConfig::new(Strategy::Nms, Budget::Count(1)).with_iou_threshold(1.0);
        assert_eq!(sample(&m, &bad), Err(Error::InvalidThreshold(1.0)));
        let g = PatchGeometry::new(4, 1, ScaleFactor::new(2).unwrap()).unwrap();
        let dense = ImportanceMap::new(1, 2, g, MetricKind::PsnrBilinear, vec![1.0, 2.0]).unwrap();
        let cfg = SamplingConfig::new(Strategy::Greedy, Budget::Count(1));
        assert_eq!(sample(&dense, &cfg), Err(Error::UnalignedStride { stride: 1, scale: 2 }));
        let empty = ImportanceMap::new(0, 0, g, MetricKind::PsnrBilinear, vec![]).unwrap();
        assert_eq!(sample(&empty, &cfg), Err(Error::EmptyGrid));
    }

    fn random_map() -> impl proptest::strategy::Strategy<Value = ImportanceMap> {
        (1usize..=12, 1usize..=12, prop_oneof![Just(2usize), Just(4), Just(6)], 1usize..=3).prop_flat_map(
            |(rows, cols, k, step)| {
                proptest::collection::vec(0u8..40, rows * cols).prop_map(move |raw| {
                    let scores = raw.into_iter().map(|v| if v == 39 { f32::INFINITY } else { f32::from(v) }).collect();
                    map_from(rows, cols, k, 2 * step, MetricKind::PsnrBilinear, scores)
                })
            },
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn greedy_is_monotone_in_portion(m in random_map(), a in 0.01f64..=1.0, b in 0.01f64..=1.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let small = sample_greedy(&m, &SamplingConfig::new(Strategy::Greedy, Budget::Portion(lo))).unwrap();
            let large = sample_greedy(&m, &SamplingConfig::new(Strategy::Greedy, Budget::Portion(hi))).unwrap();
            prop_assert_eq!(&large.entries[..small.entries.len()], &small.entries[..]);
        }

        #[test]
        fn nms_respects_threshold(m in random_map(), t in 0.0f64..0.95, seed in any::<u64>()) {
            let cfg = SamplingConfig::new(Strategy::Nms, Budget::Portion(1.0)).with_iou_threshold(t).with_seed(seed);
            let out = sample_nms(&m, &cfg).unwrap();
            let k = m.geometry().patch_size();
            for (i, x) in out.entries.iter().enumerate() {
                for y in &out.entries[i + 1..] {
                    prop_assert!(iou((x.u, x.v), (y.u, y.v), k) <= t);
                }
            }
        }

        #[test]
        fn dart_darts_never_overlap(m in random_map(), seed in any::<u64>(), n in 1usize..20) {
            let cfg = SamplingConfig::new(Strategy::Dart, Budget::Count(n)).with_seed(seed);
            let out = sample_dart(&m, &cfg).unwrap();
            let k = m.geometry().patch_size();
            prop_assert!(!out.entries.is_empty());
            for (i, x) in out.entries.iter().enumerate() {
                for y in &out.entries[i + 1..] {
                    prop_assert_eq!(iou((x.u, x.v), (y.u, y.v), k), 0.0);
                }
            }
            prop_assert_eq!(out, sample_dart(&m, &cfg).unwrap());
        }
    }
}
