use std::fmt::Write;

use microset::geometry::Aabb;
use microset::{CoverSeq, DustTree, Error, Result};

const SIZE: f64 = 800.0;

fn header(out: &mut String) {
    let s = SIZE;
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{s}" height="{s}" viewBox="0 0 {s} {s}">"#
    )
    .unwrap();
    writeln!(out, r#"<rect x="0" y="0" width="{s}" height="{s}" fill="white" stroke="black"/>"#).unwrap();
}

/// Rectangle in SVG coordinates, y pointing down.
fn rect(out: &mut String, b: &Aabb, style: &str) {
    let x = b.lo(0).to_f64() * SIZE;
    let y = (1.0 - b.hi(1).to_f64()) * SIZE;
    let w = b.side(0).to_f64() * SIZE;
    let h = b.side(1).to_f64() * SIZE;
    writeln!(out, r#"<rect x="{x:.4}" y="{y:.4}" width="{w:.4}" height="{h:.4}" {style}/>"#).unwrap();
}

pub fn dust_level(tree: &DustTree, level: u32) -> Result<String> {
    if tree.spec().dim() != 2 {
        return Err(Error::Invalid("only planar trees can be drawn".into()));
    }
    let mut out = String::new();
    header(&mut out);
    for k in 1..=level {
        let style = if k == level {
            r#"fill="black""#
        } else {
            r#"fill="none" stroke="gray" stroke-width="0.5""#
        };
        for q in tree.level(k)? {
            rect(&mut out, q.as_box(), style);
        }
    }
    out.push_str("</svg>\n");
    Ok(out)
}

pub fn cover_boxes(cover: &CoverSeq) -> Result<String> {
    if cover.dim() != 2 {
        return Err(Error::Invalid("only planar covers can be drawn".into()));
    }
    let mut out = String::new();
    header(&mut out);
    for b in cover.pieces() {
        rect(&mut out, b, r#"fill="steelblue" fill-opacity="0.4" stroke="navy" stroke-width="0.5""#);
    }
    out.push_str("</svg>\n");
    Ok(out)
}
