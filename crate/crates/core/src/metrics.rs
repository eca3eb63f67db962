//! Layout quality (perimeter and aspect ratios) and stability under
//! perturbed inputs (Hausdorff distance between matching cells).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{aspect_ratio, full_perimeter, hausdorff_distance};
use crate::layout::Layout;
use crate::tree::AreaList;

/// Perturbation levels used when none are given.
pub const DEFAULT_LEVELS: [f64; 3] = [0.01, 0.05, 0.1];
pub const DEFAULT_ROUNDS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    /// Sum of `2(w + h)` over cells.
    pub total_perimeter: f64,
    pub max_ar: f64,
    pub avg_ar: f64,
    /// Area-weighted average aspect ratio.
    pub awar: f64,
}

pub fn layout_metrics(layout: &Layout) -> Result<MetricsReport> {
    if layout.is_empty() {
        return Err(Error::EmptySet);
    }
    let n = layout.len() as f64;
    let (mut perim, mut max_ar, mut sum_ar, mut weighted, mut area) = (0.0, 1.0f64, 0.0, 0.0, 0.0);
    for r in layout.cells.values() {
        let ar = aspect_ratio(r);
        perim += full_perimeter(r);
        max_ar = max_ar.max(ar);
        sum_ar += ar;
        weighted += r.area() * ar;
        area += r.area();
    }
    Ok(MetricsReport {
        total_perimeter: perim,
        max_ar,
        avg_ar: sum_ar / n,
        awar: weighted / area,
    })
}

/// Adds `U(0,1) * level` to every area and rescales back to the original
/// total. Ids and order are kept.
pub fn perturb_areas<R: Rng + ?Sized>(areas: &AreaList, level: f64, rng: &mut R) -> AreaList {
    let total = areas.total();
    let mut out: Vec<f64> = areas.areas.iter().map(|a| a + rng.random::<f64>() * level).collect();
    if level != 0.0 {
        let scale = total / out.iter().sum::<f64>();
        out.iter_mut().for_each(|a| *a *= scale);
    }
    AreaList {
        ids: areas.ids.clone(),
        areas: out,
    }
}

/// Max and mean Hausdorff distance over matching cells, with both layouts
/// anchored so their containers start at the origin.
pub fn stability_between(a: &Layout, b: &Layout) -> Result<(f64, f64)> {
    stability_between_frames(a, b, true)
}

/// As [`stability_between`]; `anchor = false` compares raw coordinates.
pub fn stability_between_frames(a: &Layout, b: &Layout, anchor: bool) -> Result<(f64, f64)> {
    if a.len() != b.len() || a.cells.keys().zip(b.cells.keys()).any(|(x, y)| x != y) {
        return Err(Error::IdMismatch);
    }
    if a.is_empty() {
        return Ok((0.0, 0.0));
    }
    let (oa, ob) = if anchor {
        ((a.container.x, a.container.y), (b.container.x, b.container.y))
    } else {
        ((0.0, 0.0), (0.0, 0.0))
    };
    let mut max = 0.0f64;
    let mut sum = 0.0;
    for (ra, rb) in a.cells.values().zip(b.cells.values()) {
        let mut ra = *ra;
        let mut rb = *rb;
        ra.x -= oa.0;
        ra.y -= oa.1;
        rb.x -= ob.0;
        rb.y -= ob.1;
        let d = hausdorff_distance(&ra, &rb);
        max = max.max(d);
        sum += d;
    }
    Ok((max, sum / a.len() as f64))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub levels: Vec<f64>,
    pub rounds: usize,
    pub seed: u64,
    /// Perturb the previous round's areas instead of the base areas.
    pub cumulative: bool,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            levels: DEFAULT_LEVELS.to_vec(),
            rounds: DEFAULT_ROUNDS,
            seed: 0,
            cumulative: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelStability {
    pub level: f64,
    pub max_hd: f64,
    pub avg_hd: f64,
    pub rounds: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub levels: Vec<LevelStability>,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Seed of the generator used for one (level, round) pair.
pub fn round_seed(seed: u64, level: f64, round: usize) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ level.to_bits()) ^ round as u64)
}

/// Runs the perturbation protocol for one layout function.
///
/// For each level the base areas are laid out once; every round perturbs
/// (from the base areas, or from the previous round when `cumulative`),
/// lays out again and compares against the base layout. Per level the
/// report keeps the max of the per-round maxima and the mean of the
/// per-round means.
pub fn stability_study<F>(layout_fn: F, areas: &AreaList, cfg: &StudyConfig) -> Result<StabilityReport>
where
    F: Fn(&AreaList) -> Result<Layout>,
{
    if cfg.rounds == 0 {
        return Err(Error::Validation("rounds must be at least 1".into()));
    }
    let base = layout_fn(areas)?;
    let mut levels = Vec::with_capacity(cfg.levels.len());
    for &level in &cfg.levels {
        let (mut max_hd, mut sum_avg) = (0.0f64, 0.0);
        let mut current = areas.clone();
        for round in 0..cfg.rounds {
            let mut rng = ChaCha8Rng::seed_from_u64(round_seed(cfg.seed, level, round));
            let from = if cfg.cumulative { &current } else { areas };
            let perturbed = perturb_areas(from, level, &mut rng);
            let layout = layout_fn(&perturbed)?;
            let (mx, avg) = stability_between(&base, &layout)?;
            max_hd = max_hd.max(mx);
            sum_avg += avg;
            current = perturbed;
        }
        levels.push(LevelStability {
            level,
            max_hd,
            avg_hd: sum_avg / cfg.rounds as f64,
            rounds: cfg.rounds,
            seed: cfg.seed,
        });
    }
    Ok(StabilityReport { levels })
}

/// One output row of a study or comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub algorithm: String,
    pub n: usize,
    pub level: Option<f64>,
    pub rounds: Option<usize>,
    pub seed: Option<u64>,
    pub perimeter: f64,
    #[serde(rename = "maxAR")]
    pub max_ar: f64,
    #[serde(rename = "avgAR")]
    pub avg_ar: f64,
    #[serde(rename = "AWAR")]
    pub awar: f64,
    #[serde(rename = "maxHD")]
    pub max_hd: Option<f64>,
    #[serde(rename = "avgHD")]
    pub avg_hd: Option<f64>,
}

impl ReportRow {
    pub fn quality(algorithm: &str, n: usize, m: &MetricsReport) -> Self {
        Self {
            algorithm: algorithm.to_string(),
            n,
            level: None,
            rounds: None,
            seed: None,
            perimeter: m.total_perimeter,
            max_ar: m.max_ar,
            avg_ar: m.avg_ar,
            awar: m.awar,
            max_hd: None,
            avg_hd: None,
        }
    }

    /// One row per level of `s`, each carrying the quality metrics `m` of
    /// the base layout.
    pub fn study(algorithm: &str, n: usize, m: &MetricsReport, s: &StabilityReport) -> Vec<Self> {
        s.levels
            .iter()
            .map(|l| Self {
                level: Some(l.level),
                rounds: Some(l.rounds),
                seed: Some(l.seed),
                max_hd: Some(l.max_hd),
                avg_hd: Some(l.avg_hd),
                ..Self::quality(algorithm, n, m)
            })
            .collect()
    }
}

/// CSV with a header row, columns in the fixed report order.
pub fn rows_to_csv(rows: &[ReportRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::Validation(e.to_string()))?;
    }
    if rows.is_empty() {
        w.write_record([
            "algorithm", "n", "level", "rounds", "seed", "perimeter", "maxAR", "avgAR", "AWAR", "maxHD", "avgHD",
        ])
        .map_err(|e| Error::Validation(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Validation(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Rect;

    fn two_halves() -> Layout {
        let mut l = Layout::new(Rect::raw(0.0, 0.0, 1.0, 1.0));
        l.cells.insert(0, Rect::raw(0.0, 0.0, 0.5, 1.0));
        l.cells.insert(1, Rect::raw(0.5, 0.0, 0.5, 1.0));
        l
    }

    #[test]
    fn single_cell_metrics() {
        let mut l = Layout::new(Rect::raw(0.0, 0.0, 1.0, 1.0));
        l.cells.insert(0, l.container);
        let m = layout_metrics(&l).unwrap();
        assert_eq!((m.total_perimeter, m.max_ar, m.avg_ar, m.awar), (4.0, 1.0, 1.0, 1.0));
    }

    #[test]
    fn two_halves_metrics() {
        let m = layout_metrics(&two_halves()).unwrap();
        assert_eq!((m.total_perimeter, m.max_ar, m.avg_ar, m.awar), (6.0, 2.0, 2.0, 2.0));
    }

    #[test]
    fn empty_layout_is_an_error() {
        assert!(layout_metrics(&Layout::new(Rect::raw(0.0, 0.0, 1.0, 1.0))).is_err());
    }

    #[test]
    fn zero_level_keeps_areas() {
        let a = AreaList::from_areas(vec![0.2, 0.3, 0.5]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(perturb_areas(&a, 0.0, &mut rng), a);
    }

    #[test]
    fn perturbation_keeps_total_and_is_seeded() {
        let a = AreaList::from_areas(vec![0.2, 0.3, 0.5]);
        let p1 = perturb_areas(&a, 0.1, &mut ChaCha8Rng::seed_from_u64(7));
        let p2 = perturb_areas(&a, 0.1, &mut ChaCha8Rng::seed_from_u64(7));
        assert_eq!(p1, p2);
        assert!((p1.total() - 1.0).abs() < 1e-12);
        assert_ne!(p1, a);
    }

    #[test]
    fn moved_cell_without_anchoring() {
        let a = two_halves();
        let mut b = a.clone();
        b.cells.get_mut(&1).unwrap().x += 1.0;
        let (mx, avg) = stability_between_frames(&a, &b, false).unwrap();
        assert!((mx - 1.0).abs() < 1e-12);
        assert!((avg - 0.5).abs() < 1e-12);
        assert_eq!(stability_between(&a, &a).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn anchoring_removes_container_offset() {
        let a = two_halves();
        let b = a.translated(crate::geometry::Vec2::new(3.0, -2.0));
        assert_eq!(stability_between(&a, &b).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn id_mismatch_is_an_error() {
        let a = two_halves();
        let mut b = a.clone();
        let r = b.cells.remove(&1).unwrap();
        b.cells.insert(5, r);
        assert!(matches!(stability_between(&a, &b), Err(Error::IdMismatch)));
    }

    #[test]
    fn zero_level_study_is_all_zero() {
        let areas = AreaList::from_areas(vec![0.5, 0.5]);
        let cfg = StudyConfig {
            levels: vec![0.0],
            rounds: 1,
            seed: 3,
            cumulative: false,
        };
        let unit = Rect::raw(0.0, 0.0, 1.0, 1.0);
        let r = stability_study(|a| crate::subdivision::squarified(unit, a), &areas, &cfg).unwrap();
        assert_eq!(r.levels[0].max_hd, 0.0);
        assert_eq!(r.levels[0].avg_hd, 0.0);
    }

    #[test]
    fn csv_column_order() {
        let m = layout_metrics(&two_halves()).unwrap();
        let csv = rows_to_csv(&[ReportRow::quality("dp", 2, &m)]).unwrap();
        let header = csv.lines().next().unwrap();
        assert_eq!(header, "algorithm,n,level,rounds,seed,perimeter,maxAR,avgAR,AWAR,maxHD,avgHD");
        assert!(rows_to_csv(&[]).unwrap().starts_with("algorithm,n,"));
    }
}
