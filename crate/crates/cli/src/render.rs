use std::fmt::Write as _;

use num_rational::BigRational;
use num_traits::Zero;

use nonconical::scalar::rational::rational_to_f64;
use nonconical::scalar::Scalar;
use nonconical::schottky::{DiskTree, GeneratorSchedule};

const PALETTE: [&str; 6] = ["#1f4e79", "#c55a11", "#548235", "#7030a0", "#bf9000", "#2e75b6"];

/// Radii below this many pixels are drawn as fixed-size markers.
const MIN_RADIUS_PX: f64 = 0.1;

/// SVG of every disk in the tree on a common horizontal scale, with the
/// real axis as a horizontal line through the disk centers.
pub fn render_svg<S: Scalar>(tree: &DiskTree<S>, s: &GeneratorSchedule, width: u32) -> anyhow::Result<String> {
    let (k, m) = (tree.k(), tree.m());
    let first = s.generator(k + 1)?;
    let last = s.generator(k + m)?;
    let left = &first.center - &first.radius;
    let right = &last.center + &last.radius;
    let span = &right - &left;
    let span = if span.is_zero() { BigRational::from_integer(1.into()) } else { span };
    let w = f64::from(width);
    let margin = 0.05 * w;
    let scale = (w - 2.0 * margin) / rational_to_f64(&span);
    let height = (w / 4.0).round().max(40.0);
    let axis = height / 2.0;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    out.push_str("<style>circle{fill-opacity:0.15;stroke-width:0.5}circle.marker{fill-opacity:1;stroke:none}</style>\n");
    let _ = writeln!(out, r##"<line x1="0" y1="{axis:.4}" x2="{width}" y2="{axis:.4}" stroke="#888" stroke-width="0.5"/>"##);
    for depth in 1..=tree.depth() {
        let color = PALETTE[(depth - 1) % PALETTE.len()];
        for node in tree.level(depth) {
            let cx = margin + rational_to_f64(&(node.disk.center().midpoint() - &left)) * scale;
            let r = rational_to_f64(&node.disk.radius().midpoint()) * scale;
            if r < MIN_RADIUS_PX {
                let _ = writeln!(
                    out,
                    r#"<circle class="marker level-{depth}" data-word="{}" cx="{cx:.4}" cy="{axis:.4}" r="1" fill="{color}"/>"#,
                    node.word
                );
            } else {
                let _ = writeln!(
                    out,
                    r#"<circle class="level-{depth}" data-word="{}" cx="{cx:.4}" cy="{axis:.4}" r="{r:.4}" fill="{color}" stroke="{color}"/>"#,
                    node.word
                );
            }
        }
    }
    out.push_str("</svg>\n");
    Ok(out)
}
