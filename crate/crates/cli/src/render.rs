//! SVG drawing of a [`LayoutDocument`].

use std::fmt::Write;

use sha2::{Digest, Sha256};
use treemap_core::layout::LayoutDocument;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SvgStyle {
    pub show_labels: bool,
    pub show_bundles: bool,
    pub palette_seed: u64,
}

/// Fill color of a cell, fixed by its name and the seed.
pub fn cell_color(name: &str, seed: u64) -> String {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(name.as_bytes());
    let d = h.finalize();
    let hue = u16::from_le_bytes([d[0], d[1]]) % 360;
    let sat = 45 + d[2] % 30;
    let light = 55 + d[3] % 20;
    format!("hsl({hue},{sat}%,{light}%)")
}

fn num(v: f64) -> String {
    let s = format!("{v:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// One `<rect>` per cell in ascending id order; bundles are outlined with
/// `<path>` at three times the cell stroke. The view box is the container,
/// with the y axis flipped so that `y` grows upward as in the layout.
pub fn render_svg(doc: &LayoutDocument, style: &SvgStyle) -> String {
    let c = doc.container;
    let stroke = 0.002 * c.w.max(c.h);
    let flip = |y: f64, h: f64| 2.0 * c.y + c.h - (y + h);
    let mut cells: Vec<_> = doc.cells.iter().collect();
    cells.sort_by_key(|cell| cell.id);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{} {} {} {}" width="800" height="{}">"#,
        num(c.x),
        num(c.y),
        num(c.w),
        num(c.h),
        num(800.0 * c.h / c.w)
    );
    let _ = writeln!(out, r##"<g stroke="#222" stroke-width="{}">"##, num(stroke));
    for cell in &cells {
        let _ = writeln!(
            out,
            r#"<rect id="cell-{}" x="{}" y="{}" width="{}" height="{}" fill="{}"><title>{}</title></rect>"#,
            cell.id,
            num(cell.x),
            num(flip(cell.y, cell.h)),
            num(cell.w),
            num(cell.h),
            cell_color(&cell.name, style.palette_seed),
            escape(&cell.name)
        );
    }
    out.push_str("</g>\n");

    if style.show_bundles && !doc.bundles.is_empty() {
        let _ = writeln!(out, r##"<g fill="none" stroke="#000" stroke-width="{}">"##, num(3.0 * stroke));
        for bundle in &doc.bundles {
            let members: Vec<_> = cells.iter().filter(|cell| bundle.contains(&cell.id)).collect();
            if members.is_empty() {
                continue;
            }
            let x0 = members.iter().map(|m| m.x).fold(f64::INFINITY, f64::min);
            let y0 = members.iter().map(|m| m.y).fold(f64::INFINITY, f64::min);
            let x1 = members.iter().map(|m| m.x + m.w).fold(f64::NEG_INFINITY, f64::max);
            let y1 = members.iter().map(|m| m.y + m.h).fold(f64::NEG_INFINITY, f64::max);
            let (top, bottom) = (flip(y1, 0.0), flip(y0, 0.0));
            let _ = writeln!(
                out,
                r#"<path class="bundle" d="M{} {}H{}V{}H{}Z"/>"#,
                num(x0),
                num(top),
                num(x1),
                num(bottom),
                num(x0)
            );
        }
        out.push_str("</g>\n");
    }

    if style.show_labels {
        out.push_str("<g font-family=\"sans-serif\" text-anchor=\"middle\" dominant-baseline=\"middle\">\n");
        for cell in &cells {
            let size = 0.25 * cell.w.min(cell.h);
            let _ = writeln!(
                out,
                r#"<text x="{}" y="{}" font-size="{}">{}</text>"#,
                num(cell.x + cell.w / 2.0),
                num(flip(cell.y, cell.h) + cell.h / 2.0),
                num(size),
                escape(&cell.name)
            );
        }
        out.push_str("</g>\n");
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use treemap_core::layout::CellRecord;
    use treemap_core::Rect;

    fn doc(cells: Vec<(usize, f64, f64, f64, f64)>, bundles: Vec<Vec<usize>>) -> LayoutDocument {
        LayoutDocument {
            container: Rect::at_origin(2.0, 1.0).unwrap(),
            cells: cells
                .into_iter()
                .map(|(id, x, y, w, h)| CellRecord { id, name: format!("c{id}"), x, y, w, h })
                .collect(),
            bundles,
        }
    }

    #[test]
    fn one_cell_one_rect() {
        let svg = render_svg(&doc(vec![(0, 0.0, 0.0, 2.0, 1.0)], vec![]), &SvgStyle::default());
        assert_eq!(svg.matches("<rect").count(), 1);
        assert!(svg.contains(r#"viewBox="0 0 2 1""#));
    }

    #[test]
    fn cells_in_id_order_with_flipped_y() {
        let d = doc(vec![(1, 1.0, 0.0, 1.0, 0.25), (0, 0.0, 0.0, 1.0, 1.0)], vec![]);
        let svg = render_svg(&d, &SvgStyle::default());
        let first = svg.find("cell-0").unwrap();
        let second = svg.find("cell-1").unwrap();
        assert!(first < second);
        assert!(svg.contains(r#"id="cell-1" x="1" y="0.75""#), "{svg}");
    }

    #[test]
    fn bundles_only_when_present_and_asked() {
        let style = SvgStyle {
            show_bundles: true,
            ..SvgStyle::default()
        };
        let plain = doc(vec![(0, 0.0, 0.0, 1.0, 1.0), (1, 1.0, 0.0, 1.0, 1.0)], vec![]);
        assert!(!render_svg(&plain, &style).contains("bundle"));
        let bundled = doc(vec![(0, 0.0, 0.0, 1.0, 1.0), (1, 1.0, 0.0, 1.0, 1.0)], vec![vec![0, 1]]);
        let svg = render_svg(&bundled, &style);
        assert_eq!(svg.matches(r#"class="bundle""#).count(), 1);
        assert!(svg.contains(r#"stroke-width="0.012""#));
        assert!(!render_svg(&bundled, &SvgStyle::default()).contains("bundle"));
    }

    #[test]
    fn palette_depends_on_name_and_seed_only() {
        assert_eq!(cell_color("a", 1), cell_color("a", 1));
        assert_ne!(cell_color("a", 1), cell_color("a", 2));
        let d = doc(vec![(0, 0.0, 0.0, 2.0, 1.0)], vec![]);
        let style = SvgStyle {
            show_labels: true,
            ..SvgStyle::default()
        };
        assert_eq!(render_svg(&d, &style), render_svg(&d, &style));
    }
}
