//! Weighted trees: ingestion, leaf numbering, and weight normalization.
//!
//! Leaves are numbered densely in document (pre-order) order. Those numbers
//! are the keys of every [`Layout`](crate::layout::Layout), which is what
//! lets stability metrics pair cells across runs.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};

/// Dense leaf index in document order.
pub type LeafId = usize;

/// Relative tolerance used when deciding whether areas already match a target.
pub const AREA_MATCH_TOL: f64 = 1e-9;

/// Input document format.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TreeFormat {
    Json,
    Csv,
}

/// A named node with a weight and ordered children.
///
/// Leaf weights are data; internal weights are derived (see
/// [`WeightedTree::recompute_internal_weights`]). Unknown JSON keys are kept
/// in `extra` and written back unchanged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedTree {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<WeightedTree>,
    #[serde(flatten)]
    pub extra: Map<String, Value>,
}

impl WeightedTree {
    pub fn leaf(name: impl Into<String>, weight: f64) -> Self {
        Self {
            name: name.into(),
            weight: Some(weight),
            children: Vec::new(),
            extra: Map::new(),
        }
    }

    pub fn node(name: impl Into<String>, children: Vec<WeightedTree>) -> Self {
        let mut t = Self {
            name: name.into(),
            weight: None,
            children,
            extra: Map::new(),
        };
        t.recompute_internal_weights();
        t
    }

    /// Flat tree with one leaf per `(name, weight)`.
    pub fn flat<S: Into<String>>(name: &str, leaves: impl IntoIterator<Item = (S, f64)>) -> Self {
        Self::node(
            name,
            leaves
                .into_iter()
                .map(|(n, w)| WeightedTree::leaf(n, w))
                .collect(),
        )
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    /// Weight of this node: the leaf weight, or the sum over descendants.
    pub fn total_weight(&self) -> f64 {
        if self.is_leaf() {
            self.weight.unwrap_or(0.0)
        } else {
            self.children.iter().map(WeightedTree::total_weight).sum()
        }
    }

    /// Number of edges on the longest root-to-leaf path.
    pub fn height(&self) -> usize {
        self.children
            .iter()
            .map(|c| c.height() + 1)
            .max()
            .unwrap_or(0)
    }

    pub fn leaf_count(&self) -> usize {
        if self.is_leaf() {
            1
        } else {
            self.children.iter().map(WeightedTree::leaf_count).sum()
        }
    }

    /// Leaves in document order; the position in the vector is the [`LeafId`].
    pub fn leaves(&self) -> Vec<&WeightedTree> {
        fn walk<'a>(t: &'a WeightedTree, out: &mut Vec<&'a WeightedTree>) {
            if t.is_leaf() {
                out.push(t);
            } else {
                for c in &t.children {
                    walk(c, out);
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out
    }

    pub fn leaf_names(&self) -> Vec<String> {
        self.leaves().into_iter().map(|l| l.name.clone()).collect()
    }

    /// Sets every internal weight to the sum of its children's weights.
    pub fn recompute_internal_weights(&mut self) -> f64 {
        if self.is_leaf() {
            return self.weight.unwrap_or(0.0);
        }
        let s = self
            .children
            .iter_mut()
            .map(WeightedTree::recompute_internal_weights)
            .sum();
        self.weight = Some(s);
        s
    }

    /// Checks that every leaf carries a finite weight > 0.
    pub fn validate(&self) -> Result<()> {
        fn walk(t: &WeightedTree, path: &str) -> Result<()> {
            let here = if path.is_empty() {
                t.name.clone()
            } else {
                format!("{path}/{}", t.name)
            };
            if t.is_leaf() {
                match t.weight {
                    None => Err(Error::Validation(format!("leaf '{here}' has no weight"))),
                    Some(w) if !w.is_finite() || w <= 0.0 => Err(Error::Validation(format!(
                        "leaf '{here}' has non-positive weight {w}"
                    ))),
                    Some(_) => Ok(()),
                }
            } else {
                t.children.iter().try_for_each(|c| walk(c, &here))
            }
        }
        walk(self, "")
    }

    /// Leaf weights in document order, paired with their ids.
    pub fn area_list(&self) -> AreaList {
        let areas = self
            .leaves()
            .iter()
            .map(|l| l.weight.unwrap_or(0.0))
            .collect::<Vec<_>>();
        AreaList::from_areas(areas)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// `label,weight` rows; only defined for trees of height at most one.
    pub fn to_csv(&self) -> Result<String> {
        if self.height() > 1 {
            return Err(Error::Validation("CSV output needs a flat tree".into()));
        }
        let mut wtr = csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(Vec::new());
        for leaf in self.leaves() {
            let w = leaf.weight.unwrap_or(0.0);
            wtr.write_record([leaf.name.as_str(), &format_weight(w)])
                .map_err(|e| Error::Validation(e.to_string()))?;
        }
        let bytes = wtr.into_inner().map_err(|e| Error::Validation(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv writer emits utf-8"))
    }
}

/// Shortest decimal form that parses back to the same `f64`.
fn format_weight(w: f64) -> String {
    let s = format!("{w}");
    debug_assert_eq!(s.parse::<f64>().ok(), Some(w));
    s
}

/// Parses a tree document; weights are validated but not normalized.
pub fn parse_tree(document: &[u8], format: TreeFormat) -> Result<WeightedTree> {
    let mut tree = match format {
        TreeFormat::Json => parse_json(document)?,
        TreeFormat::Csv => parse_csv(document)?,
    };
    tree.validate()?;
    tree.recompute_internal_weights();
    Ok(tree)
}

fn parse_json(document: &[u8]) -> Result<WeightedTree> {
    let tree: WeightedTree = serde_json::from_slice(document).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    check_grammar(&tree)?;
    Ok(tree)
}

/// A weight is required exactly when `children` is absent or empty.
fn check_grammar(t: &WeightedTree) -> Result<()> {
    if t.is_leaf() && t.weight.is_none() {
        return Err(Error::Validation(format!("leaf '{}' has no weight", t.name)));
    }
    t.children.iter().try_for_each(check_grammar)
}

fn parse_csv(document: &[u8]) -> Result<WeightedTree> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(document);
    let mut leaves = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let (line, column) = e
                .position()
                .map(|p| (p.line() as usize, 1))
                .unwrap_or((0, 0));
            Error::Parse {
                line,
                column,
                message: e.to_string(),
            }
        })?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        if rec.len() != 2 {
            return Err(Error::Parse {
                line,
                column: 1,
                message: format!("expected 'label,weight', found {} fields", rec.len()),
            });
        }
        let weight: f64 = rec[1].parse().map_err(|_| Error::Parse {
            line,
            column: rec[0].len() + 2,
            message: format!("'{}' is not a number", &rec[1]),
        })?;
        leaves.push(WeightedTree::leaf(&rec[0], weight));
    }
    Ok(WeightedTree::node("root", leaves))
}

/// Scales every leaf weight so they sum to `target_area` and recomputes
/// internal weights.
pub fn normalize_weights(tree: &WeightedTree, target_area: f64) -> Result<WeightedTree> {
    if !(target_area.is_finite() && target_area > 0.0) {
        return Err(Error::Validation(format!(
            "target area must be positive, got {target_area}"
        )));
    }
    tree.validate()?;
    let total = tree.total_weight();
    if total <= 0.0 {
        return Err(Error::ZeroTotalWeight);
    }
    let mut out = tree.clone();
    if (total - target_area).abs() > 1e-12 * target_area {
        let s = target_area / total;
        scale_leaves(&mut out, s);
    }
    out.recompute_internal_weights();
    Ok(out)
}

fn scale_leaves(t: &mut WeightedTree, s: f64) {
    if t.is_leaf() {
        if let Some(w) = t.weight.as_mut() {
            *w *= s;
        }
    } else {
        for c in &mut t.children {
            scale_leaves(c, s);
        }
    }
}

/// Ordered positive areas with parallel leaf ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AreaList {
    pub ids: Vec<LeafId>,
    pub areas: Vec<f64>,
}

impl AreaList {
    /// Areas with ids `0..n`.
    pub fn from_areas(areas: Vec<f64>) -> Self {
        Self {
            ids: (0..areas.len()).collect(),
            areas,
        }
    }

    pub fn new(ids: Vec<LeafId>, areas: Vec<f64>) -> Result<Self> {
        if ids.len() != areas.len() {
            return Err(Error::Validation(format!(
                "{} ids for {} areas",
                ids.len(),
                areas.len()
            )));
        }
        Ok(Self { ids, areas })
    }

    pub fn len(&self) -> usize {
        self.areas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.areas.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.areas.iter().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (LeafId, f64)> + '_ {
        self.ids.iter().copied().zip(self.areas.iter().copied())
    }

    /// Rejects empty lists and non-positive or non-finite areas.
    pub fn validate(&self) -> Result<()> {
        if self.is_empty() {
            return Err(Error::NoAreas);
        }
        for (id, a) in self.iter() {
            if !a.is_finite() || a <= 0.0 {
                return Err(Error::Validation(format!("area of leaf {id} is {a}")));
            }
        }
        Ok(())
    }

    /// Scales the areas so they sum to `target`.
    pub fn normalized(&self, target: f64) -> Result<AreaList> {
        self.validate()?;
        let total = self.total();
        if total <= 0.0 {
            return Err(Error::ZeroTotalWeight);
        }
        let s = target / total;
        Ok(Self {
            ids: self.ids.clone(),
            areas: self.areas.iter().map(|a| a * s).collect(),
        })
    }

    /// Areas fitted to a container area. Mismatched totals are rescaled with
    /// a warning, or rejected when `strict` is set.
    pub fn fit_to(&self, container_area: f64, strict: bool) -> Result<AreaList> {
        self.validate()?;
        let total = self.total();
        if (total - container_area).abs() <= AREA_MATCH_TOL * container_area {
            return Ok(self.clone());
        }
        if strict {
            return Err(Error::AreaMismatch {
                expected: container_area,
                actual: total,
            });
        }
        log::warn!("areas sum to {total}; rescaling to container area {container_area}");
        self.normalized(container_area)
    }

    /// Indices into `self` sorted by area, descending; ties by id.
    pub fn order_descending(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.sort_by(|&a, &b| {
            self.areas[b]
                .total_cmp(&self.areas[a])
                .then(self.ids[a].cmp(&self.ids[b]))
        });
        idx
    }

    /// Indices into `self` sorted by area, ascending; ties by id.
    pub fn order_ascending(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.sort_by(|&a, &b| {
            self.areas[a]
                .total_cmp(&self.areas[b])
                .then(self.ids[a].cmp(&self.ids[b]))
        });
        idx
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_single_leaf_json() {
        let t = parse_tree(
            br#"{"name":"root","children":[{"name":"a","weight":1}]}"#,
            TreeFormat::Json,
        )
        .unwrap();
        assert_eq!(t.height(), 1);
        assert_eq!(t.leaf_count(), 1);
        assert_eq!(t.weight, Some(1.0));
    }

    #[test]
    fn parses_flat_csv() {
        let t = parse_tree(b"a,1\nb,2", TreeFormat::Csv).unwrap();
        assert_eq!(t.height(), 1);
        assert_eq!(t.leaf_names(), vec!["a", "b"]);
        assert_eq!(t.area_list().areas, vec![1.0, 2.0]);
    }

    #[test]
    fn rejects_negative_and_zero_weights() {
        let neg = parse_tree(
            br#"{"name":"r","children":[{"name":"a","weight":-1}]}"#,
            TreeFormat::Json,
        );
        assert!(matches!(neg, Err(Error::Validation(_))));
        assert!(matches!(
            parse_tree(b"a,0\n", TreeFormat::Csv),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn malformed_json_reports_position() {
        match parse_tree(b"{\"name\": \"r\",\n  \"children\": [}", TreeFormat::Json) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn malformed_csv_reports_line() {
        match parse_tree(b"a,1\nb,x\n", TreeFormat::Csv) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(matches!(
            parse_tree(b"a,1,2\n", TreeFormat::Csv),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn leaf_without_weight_is_rejected() {
        let r = parse_tree(br#"{"name":"r","children":[{"name":"a"}]}"#, TreeFormat::Json);
        assert!(matches!(r, Err(Error::Validation(_))));
    }

    #[test]
    fn normalize_examples() {
        let t = WeightedTree::flat("r", [("a", 1.0), ("b", 1.0), ("c", 2.0)]);
        let n = normalize_weights(&t, 1.0).unwrap();
        assert_eq!(n.area_list().areas, vec![0.25, 0.25, 0.5]);
        assert_eq!(n.weight, Some(1.0));

        let already = WeightedTree::flat("r", [("a", 0.25), ("b", 0.75)]);
        assert_eq!(normalize_weights(&already, 1.0).unwrap(), already);

        let mut leaves = vec![("big".to_string(), 15.0)];
        leaves.extend((0..17).map(|i| (format!("s{i}"), 1.0)));
        let extreme = WeightedTree::flat("r", leaves);
        assert_eq!(normalize_weights(&extreme, 32.0).unwrap(), extreme);
    }

    #[test]
    fn normalize_rejects_zero_total() {
        let mut t = WeightedTree::flat("r", [("a", 1.0)]);
        t.children[0].weight = Some(0.0);
        assert!(normalize_weights(&t, 1.0).is_err());
    }

    #[test]
    fn internal_weights_are_child_sums() {
        let t = parse_tree(
            br#"{"name":"r","weight":99,"children":[
                {"name":"x","children":[{"name":"a","weight":1},{"name":"b","weight":2}]},
                {"name":"c","weight":3}]}"#,
            TreeFormat::Json,
        )
        .unwrap();
        assert_eq!(t.weight, Some(6.0));
        assert_eq!(t.children[0].weight, Some(3.0));
        assert_eq!(t.leaf_names(), vec!["a", "b", "c"]);
    }

    #[test]
    fn extra_keys_pass_through() {
        let doc = br#"{"name":"r","children":[{"name":"a","weight":1,"color":"red"}]}"#;
        let t = parse_tree(doc, TreeFormat::Json).unwrap();
        let again = parse_tree(t.to_json().unwrap().as_bytes(), TreeFormat::Json).unwrap();
        assert_eq!(again.children[0].extra["color"], "red");
    }

    #[test]
    fn fit_to_strict_and_lenient() {
        let a = AreaList::from_areas(vec![1.0, 3.0]);
        assert!(matches!(a.fit_to(8.0, true), Err(Error::AreaMismatch { .. })));
        assert_eq!(a.fit_to(8.0, false).unwrap().areas, vec![2.0, 6.0]);
        assert_eq!(a.fit_to(4.0, true).unwrap(), a);
    }

    #[test]
    fn sort_orders_break_ties_by_id() {
        let a = AreaList::new(vec![5, 2, 9], vec![1.0, 1.0, 2.0]).unwrap();
        assert_eq!(a.order_descending(), vec![2, 1, 0]);
        assert_eq!(a.order_ascending(), vec![1, 0, 2]);
    }
}
