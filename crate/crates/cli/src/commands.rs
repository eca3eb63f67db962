//! The four subcommands.

use std::fs;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use treemap_core::layout::LayoutDocument;
use treemap_core::metrics::{layout_metrics, rows_to_csv, stability_study, MetricsReport, ReportRow, StudyConfig};
use treemap_core::optimizer::SolveConfig;
use treemap_core::spiral::{layout_hierarchy, SpiralConfig};
use treemap_core::subdivision::SplitConstant;
use treemap_core::tree::{parse_tree, TreeFormat};
use treemap_core::{Algorithm, AlgorithmOptions, AreaList, Error, Layout, OptOptions, Rect, Result, WeightedTree};

use crate::args::{AlgoOpts, CompareArgs, Format, LayoutArgs, RenderArgs, StudyArgs};
use crate::render::{render_svg, SvgStyle};
use crate::table::{markdown, CompareRow};

/// Algorithm, container and strictness resolved from the shared flags.
pub struct RunSpec {
    pub algorithm: Algorithm,
    pub container: Option<Rect>,
    pub strict: bool,
}

impl RunSpec {
    pub fn new(id: &str, o: &AlgoOpts) -> Result<Self> {
        let opts = AlgorithmOptions {
            split: SplitConstant::new(o.c).map_err(usage)?,
            spiral: SpiralConfig::new(o.rho).map_err(usage)?,
            opt: OptOptions {
                area_weighted: o.alpha == 1,
                beta: o.beta,
                solve: SolveConfig {
                    node_limit: o.node_limit,
                    time_limit: o.time_limit.map(std::time::Duration::from_secs_f64),
                    break_symmetry: o.break_symmetry,
                    ..SolveConfig::default()
                },
            },
        };
        if !(o.beta.is_finite() && o.beta >= 0.0) {
            return Err(Error::Usage(format!("--beta must be a non-negative number, got {}", o.beta)));
        }
        let algorithm = Algorithm::from_id(id, &opts)?;
        let container = match o.container.as_deref() {
            None => None,
            Some(&[w, h]) => Some(Rect::at_origin(w, h).map_err(usage)?),
            Some(_) => return Err(Error::Usage("--container takes W H".into())),
        };
        match (algorithm.needs_container(), container.is_some()) {
            (true, false) => Err(Error::Usage(format!("{id} needs --container W H"))),
            (false, true) => Err(Error::Usage(format!("{id} builds its own container; drop --container"))),
            _ => Ok(Self {
                algorithm,
                container,
                strict: o.strict,
            }),
        }
    }

    /// Lays out the tree: flat trees as one list of areas, deeper trees
    /// level by level.
    pub fn layout_tree(&self, tree: &WeightedTree) -> Result<Layout> {
        if tree.height() <= 1 {
            return self.algorithm.layout_checked(self.container, &tree.area_list(), self.strict);
        }
        if let Some(c) = self.container {
            tree.area_list().fit_to(c.area(), self.strict)?;
        }
        Ok(layout_hierarchy(tree, &self.algorithm, self.container)?.layout)
    }
}

fn usage(e: Error) -> Error {
    Error::Usage(e.to_string())
}

pub fn read_tree(path: &Path) -> Result<WeightedTree> {
    let bytes = fs::read(path).map_err(|e| Error::Usage(format!("cannot read {}: {e}", path.display())))?;
    let format = match path.extension().and_then(|e| e.to_str()) {
        Some(ext) if ext.eq_ignore_ascii_case("csv") => TreeFormat::Csv,
        _ => TreeFormat::Json,
    };
    parse_tree(&bytes, format)
}

/// Replaces leaf weights in pre-order.
fn with_leaf_weights(tree: &WeightedTree, areas: &AreaList) -> WeightedTree {
    fn walk(t: &mut WeightedTree, w: &mut impl Iterator<Item = f64>) {
        if t.is_leaf() {
            t.weight = w.next();
        } else {
            t.children.iter_mut().for_each(|c| walk(c, w));
        }
    }
    let mut out = tree.clone();
    walk(&mut out, &mut areas.areas.iter().copied());
    out.recompute_internal_weights();
    out
}

fn emit(output: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match output {
        Some(p) => fs::write(p, bytes)?,
        None => std::io::stdout().write_all(bytes)?,
    }
    Ok(())
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

fn metrics_row(id: &str, n: usize, m: &MetricsReport, format: Format) -> Result<String> {
    let row = ReportRow::quality(id, n, m);
    match format {
        Format::Md => Ok(markdown(
            &["algorithm", "n", "perimeter", "maxAR", "avgAR", "AWAR"],
            &[vec![id.to_string(), n.to_string(), fmt(m.total_perimeter), fmt(m.max_ar), fmt(m.avg_ar), fmt(m.awar)]],
        )),
        _ => rows_to_csv(&[row]),
    }
}

pub(crate) fn fmt(v: f64) -> String {
    format!("{v:.6}")
}

pub fn cmd_layout(a: &LayoutArgs) -> Result<()> {
    let spec = RunSpec::new(&a.algorithm, &a.opts)?;
    let tree = read_tree(&a.instance)?;
    let layout = spec.layout_tree(&tree)?;
    let m = layout_metrics(&layout)?;
    let doc = LayoutDocument::from_layout(&layout, &tree.leaf_names());
    let id = spec.algorithm.id();
    let artifact = match a.format {
        Format::Json => to_json(&doc)?,
        Format::Svg => render_svg(
            &doc,
            &SvgStyle {
                show_labels: false,
                show_bundles: true,
                palette_seed: a.seed,
            },
        ),
        Format::Csv | Format::Md => {
            return emit(a.output.as_deref(), metrics_row(id, layout.len(), &m, a.format)?.as_bytes());
        }
    };
    emit(a.output.as_deref(), artifact.as_bytes())?;
    let row = metrics_row(id, layout.len(), &m, Format::Csv)?;
    if a.output.is_some() {
        print!("{row}");
    } else {
        eprint!("{row}");
    }
    Ok(())
}

/// Worker count from `TREEMAP_THREADS`, when set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var("TREEMAP_THREADS").ok()?.trim().parse().ok().filter(|&n| n > 0)
}

/// Rows of a comparison, sorted by instance then algorithm, followed by one
/// mean row per algorithm.
pub fn compare_rows(instances: &[std::path::PathBuf], algorithms: &[String], opts: &AlgoOpts) -> Result<Vec<CompareRow>> {
    if algorithms.is_empty() || algorithms.iter().any(|a| a.trim().is_empty()) {
        return Err(Error::Usage("--algorithms needs at least one id".into()));
    }
    // Spirals build their own container, so --container only reaches the
    // other algorithms here.
    let spiral_opts = AlgoOpts {
        container: None,
        ..opts.clone()
    };
    let specs = algorithms
        .iter()
        .map(|id| {
            let id = id.trim();
            let spiral = Algorithm::from_id(id, &AlgorithmOptions::default()).is_ok_and(|a| !a.needs_container());
            RunSpec::new(id, if spiral { &spiral_opts } else { opts })
        })
        .collect::<Result<Vec<_>>>()?;
    let trees = instances
        .iter()
        .map(|p| Ok((p.display().to_string(), read_tree(p)?)))
        .collect::<Result<Vec<_>>>()?;
    let jobs: Vec<_> = trees.iter().flat_map(|t| specs.iter().map(move |s| (t, s))).collect();

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_cap() {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| Error::Validation(e.to_string()))?;
    let results: Vec<Result<CompareRow>> = pool.install(|| {
        jobs.par_iter()
            .map(|((name, tree), spec)| {
                let layout = spec.layout_tree(tree)?;
                let m = layout_metrics(&layout)?;
                Ok(CompareRow::new(name, spec.algorithm.id(), layout.len(), &m))
            })
            .collect()
    });
    let mut rows = results.into_iter().collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| (&a.instance, &a.algorithm).cmp(&(&b.instance, &b.algorithm)));

    let mut ids: Vec<&str> = specs.iter().map(|s| s.algorithm.id()).collect();
    ids.sort_unstable();
    ids.dedup();
    let means: Vec<CompareRow> = ids
        .iter()
        .map(|id| CompareRow::mean(id, rows.iter().filter(|r| r.algorithm == *id)))
        .collect();
    rows.extend(means);
    Ok(rows)
}

pub fn cmd_compare(a: &CompareArgs) -> Result<()> {
    let rows = compare_rows(&a.instances, &a.algorithms, &a.opts)?;
    let out = match a.format {
        Format::Csv => crate::table::compare_csv(&rows)?,
        Format::Md => crate::table::compare_markdown(&rows),
        Format::Json => to_json(&rows)?,
        Format::Svg => return Err(Error::Usage("compare writes csv, md or json".into())),
    };
    emit(a.output.as_deref(), out.as_bytes())
}

pub fn study_rows(a: &StudyArgs) -> Result<Vec<ReportRow>> {
    let spec = RunSpec::new(&a.algorithm, &a.opts)?;
    let tree = read_tree(&a.instance)?;
    if a.levels.iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
        return Err(Error::Usage("--levels must be non-negative numbers".into()));
    }
    if a.rounds == 0 {
        return Err(Error::Usage("--rounds must be at least 1".into()));
    }
    let cfg = StudyConfig {
        levels: a.levels.clone(),
        rounds: a.rounds,
        seed: a.seed,
        cumulative: a.cumulative,
    };
    let base = spec.layout_tree(&tree)?;
    let m = layout_metrics(&base)?;
    let report = stability_study(|areas| spec.layout_tree(&with_leaf_weights(&tree, areas)), &tree.area_list(), &cfg)?;
    Ok(ReportRow::study(spec.algorithm.id(), base.len(), &m, &report))
}

pub fn cmd_study(a: &StudyArgs) -> Result<()> {
    let rows = study_rows(a)?;
    let out = match a.format {
        Format::Csv => rows_to_csv(&rows)?,
        Format::Json => to_json(&rows)?,
        Format::Md => {
            let body: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        r.algorithm.clone(),
                        r.n.to_string(),
                        r.level.map(fmt).unwrap_or_default(),
                        r.rounds.map(|v| v.to_string()).unwrap_or_default(),
                        r.seed.map(|v| v.to_string()).unwrap_or_default(),
                        fmt(r.perimeter),
                        fmt(r.max_ar),
                        fmt(r.avg_ar),
                        fmt(r.awar),
                        r.max_hd.map(fmt).unwrap_or_default(),
                        r.avg_hd.map(fmt).unwrap_or_default(),
                    ]
                })
                .collect();
            markdown(
                &["algorithm", "n", "level", "rounds", "seed", "perimeter", "maxAR", "avgAR", "AWAR", "maxHD", "avgHD"],
                &body,
            )
        }
        Format::Svg => return Err(Error::Usage("study writes csv, md or json".into())),
    };
    emit(a.output.as_deref(), out.as_bytes())
}

pub fn cmd_render(a: &RenderArgs) -> Result<()> {
    let bytes = fs::read(&a.layout).map_err(|e| Error::Usage(format!("cannot read {}: {e}", a.layout.display())))?;
    let doc: LayoutDocument = serde_json::from_slice(&bytes).map_err(|e| Error::Usage(format!("not a layout file: {e}")))?;
    let svg = render_svg(
        &doc,
        &SvgStyle {
            show_labels: a.labels,
            show_bundles: !a.no_bundles,
            palette_seed: a.seed,
        },
    );
    emit(a.output.as_deref(), svg.as_bytes())
}
