//! One entry point for every layout algorithm, keyed by a short id.

use crate::error::{Error, Result};
use crate::geometry::Rect;
use crate::layout::Layout;
use crate::optimizer::{build_model, solve, ModelParams, SolveConfig, Status};
use crate::spiral::{build, SpiralConfig, SpiralKind};
use crate::subdivision::{dc_baseline, dynamic_prog, modified_dc, squarified, SplitConstant};
use crate::tree::AreaList;

#[derive(Debug, Clone, PartialEq)]
pub enum Algorithm {
    Squarified,
    Dc,
    Mdc(SplitConstant),
    Dp,
    Opt(OptOptions),
    Spiral(SpiralKind, SpiralConfig),
}

/// Settings of the exact optimizer when run as a layout algorithm.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct OptOptions {
    /// Weight each cell's perimeter by its area.
    pub area_weighted: bool,
    /// Reward for cells at least as wide as tall.
    pub beta: f64,
    pub solve: SolveConfig,
}

/// Per-family options consulted by [`Algorithm::from_id`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AlgorithmOptions {
    pub split: SplitConstant,
    pub spiral: SpiralConfig,
    pub opt: OptOptions,
}

/// Every id accepted by [`Algorithm::from_id`].
pub const ALGORITHM_IDS: [&str; 8] = ["squarified", "dc", "mdc", "dp", "opt", "sspiral", "sqbundle", "stbundle"];

impl Algorithm {
    /// Algorithm for `id` with the given options.
    pub fn from_id(id: &str, opts: &AlgorithmOptions) -> Result<Self> {
        let spiral = opts.spiral;
        Ok(match id {
            "squarified" => Algorithm::Squarified,
            "dc" => Algorithm::Dc,
            "mdc" => Algorithm::Mdc(opts.split),
            "dp" => Algorithm::Dp,
            "opt" => Algorithm::Opt(opts.opt.clone()),
            "sspiral" => Algorithm::Spiral(SpiralKind::Symmetric, spiral),
            "sqbundle" => Algorithm::Spiral(SpiralKind::SquareBundle, spiral),
            "stbundle" => Algorithm::Spiral(SpiralKind::StripBundle, spiral),
            other => return Err(Error::Usage(format!("unknown algorithm '{other}'"))),
        })
    }

    pub fn id(&self) -> &'static str {
        match self {
            Algorithm::Squarified => "squarified",
            Algorithm::Dc => "dc",
            Algorithm::Mdc(_) => "mdc",
            Algorithm::Dp => "dp",
            Algorithm::Opt(_) => "opt",
            Algorithm::Spiral(SpiralKind::Symmetric, _) => "sspiral",
            Algorithm::Spiral(SpiralKind::SquareBundle, _) => "sqbundle",
            Algorithm::Spiral(SpiralKind::StripBundle, _) => "stbundle",
        }
    }

    /// The spiral variant, for algorithms that build their own container.
    pub fn spiral(&self) -> Option<(SpiralKind, SpiralConfig)> {
        match self {
            Algorithm::Spiral(k, c) => Some((*k, *c)),
            _ => None,
        }
    }

    pub fn needs_container(&self) -> bool {
        self.spiral().is_none()
    }

    /// Lays out a flat list of areas. Container-based algorithms rescale the
    /// areas to the container first.
    pub fn layout(&self, container: Option<Rect>, areas: &AreaList) -> Result<Layout> {
        self.layout_checked(container, areas, false)
    }

    /// As [`Algorithm::layout`]; with `strict` a total that does not match
    /// the container area is an error instead of being rescaled.
    pub fn layout_checked(&self, container: Option<Rect>, areas: &AreaList, strict: bool) -> Result<Layout> {
        if let Some((kind, cfg)) = self.spiral() {
            if container.is_some() {
                return Err(Error::Usage(format!("{} builds its own container", self.id())));
            }
            areas.validate()?;
            let items: Vec<_> = areas.iter().collect();
            return Ok(build(kind, &items, cfg, None, |_| {}));
        }
        let c = container.ok_or_else(|| Error::Usage(format!("{} needs a container", self.id())))?;
        let areas = areas.fit_to(c.area(), strict)?;
        match self {
            Algorithm::Squarified => squarified(c, &areas),
            Algorithm::Dc => dc_baseline(c, &areas),
            Algorithm::Mdc(k) => modified_dc(c, &areas, *k),
            Algorithm::Dp => dynamic_prog(c, &areas),
            Algorithm::Opt(o) => optimize(c, &areas, o),
            Algorithm::Spiral(..) => unreachable!("handled above"),
        }
    }
}

fn optimize(container: Rect, areas: &AreaList, o: &OptOptions) -> Result<Layout> {
    let mut params = ModelParams::zero(areas.len());
    params.area_weighted = o.area_weighted;
    params.beta = o.beta;
    let origin = Rect::at_origin(container.w, container.h)?;
    let m = build_model(origin, areas.clone(), params)?;
    let s = solve(&m, &o.solve)?;
    log::info!("optimizer: {:?} after {} nodes, objective {:.9}, bound {:.9}", s.status, s.nodes, s.objective, s.bound);
    if s.status == Status::Infeasible || s.rects.is_empty() {
        return Err(Error::Infeasible("no layout satisfies the model".into()));
    }
    Ok(s.to_layout(&m).translated(crate::geometry::Vec2::new(container.x, container.y)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_round_trip() {
        let opts = AlgorithmOptions::default();
        for id in ALGORITHM_IDS {
            assert_eq!(Algorithm::from_id(id, &opts).unwrap().id(), id);
        }
        assert!(Algorithm::from_id("nope", &opts).is_err());
    }

    #[test]
    fn container_rules() {
        let a = AreaList::from_areas(vec![0.5, 0.5]);
        let unit = Rect::raw(0.0, 0.0, 1.0, 1.0);
        assert!(matches!(Algorithm::Dp.layout(None, &a), Err(Error::Usage(_))));
        let s = Algorithm::Spiral(SpiralKind::Symmetric, SpiralConfig::default());
        assert!(matches!(s.layout(Some(unit), &a), Err(Error::Usage(_))));
    }

    #[test]
    fn optimizer_in_an_offset_container() {
        let a = AreaList::from_areas(vec![1.0, 1.0]);
        let c = Rect::raw(3.0, 5.0, 2.0, 1.0);
        let l = Algorithm::Opt(OptOptions::default()).layout(Some(c), &a).unwrap();
        assert_eq!(l.cells.len(), 2);
        assert!(l.cells.values().all(|r| c.contains_rect(r, 1e-9)), "{l:?}");
        assert!(l.cells.values().all(|r| (r.w - 1.0).abs() < 1e-6 && (r.h - 1.0).abs() < 1e-6));
    }

    #[test]
    fn rescales_unless_strict() {
        let a = AreaList::from_areas(vec![1.0, 1.0]);
        let unit = Rect::raw(0.0, 0.0, 1.0, 1.0);
        let l = Algorithm::Dp.layout(Some(unit), &a).unwrap();
        assert!((l.total_cell_area() - 1.0).abs() < 1e-12);
        assert!(matches!(
            Algorithm::Dp.layout_checked(Some(unit), &a, true),
            Err(Error::AreaMismatch { .. })
        ));
    }
}
