//! Minimal SVG emission: domain outlines, point overlays, ball covers, and
//! simple x-y curves.  2D only; callers skip plots in 3D runs.

use crate::covering::{CoverResult, Tag};
use crate::frequency::FrequencyProfile;
use crate::geometry::ConvexDomain;
use crate::linalg::Point;
use crate::symmetry::ScanPoint;

const W: f64 = 640.0;

fn header(extent: f64) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{W}\" viewBox=\"{} {} {} {}\">\n",
        -extent, -extent, 2.0 * extent, 2.0 * extent
    )
}

/// Clip the domain against the [-e, e]^2 box into a polygon outline.
fn domain_polygon(domain: &ConvexDomain, extent: f64) -> Vec<(f64, f64)> {
    let mut poly = vec![
        (-extent, -extent),
        (extent, -extent),
        (extent, extent),
        (-extent, extent),
    ];
    for h in &domain.halves {
        let mut out: Vec<(f64, f64)> = Vec::new();
        let inside = |p: (f64, f64)| h.normal[0] * p.0 + h.normal[1] * p.1 <= h.offset;
        for i in 0..poly.len() {
            let a = poly[i];
            let b = poly[(i + 1) % poly.len()];
            let ia = inside(a);
            let ib = inside(b);
            let cross = |a: (f64, f64), b: (f64, f64)| {
                let da = h.normal[0] * a.0 + h.normal[1] * a.1 - h.offset;
                let db = h.normal[0] * b.0 + h.normal[1] * b.1 - h.offset;
                let t = da / (da - db);
                (a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1))
            };
            match (ia, ib) {
                (true, true) => out.push(b),
                (true, false) => out.push(cross(a, b)),
                (false, true) => {
                    out.push(cross(a, b));
                    out.push(b);
                }
                (false, false) => {}
            }
        }
        poly = out;
        if poly.is_empty() {
            break;
        }
    }
    poly
}

fn polygon_path(poly: &[(f64, f64)], style: &str) -> String {
    if poly.is_empty() {
        return String::new();
    }
    let mut d = String::from("M");
    for (x, y) in poly {
        d.push_str(&format!(" {x},{}", -y));
    }
    d.push_str(" Z");
    format!("<path d=\"{d}\" {style}/>\n")
}

pub fn strata_svg(domain: &ConvexDomain, points: &[ScanPoint], extent: f64) -> String {
    let mut s = header(extent);
    s.push_str(&polygon_path(
        &domain_polygon(domain, extent),
        "fill=\"#e8f0fe\" stroke=\"#555\" stroke-width=\"0.004\"",
    ));
    for sp in points {
        s.push_str(&format!(
            "<circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"#c0392b\"/>\n",
            sp.p[0],
            -sp.p[1],
            extent / 160.0
        ));
    }
    s.push_str("</svg>\n");
    s
}

pub fn cover_svg(domain: &ConvexDomain, cover: &CoverResult, extent: f64) -> String {
    let mut s = header(extent);
    s.push_str(&polygon_path(
        &domain_polygon(domain, extent),
        "fill=\"#f4f7ee\" stroke=\"#555\" stroke-width=\"0.004\"",
    ));
    for n in &cover.trace {
        let color = match n.tag {
            Tag::Good => "#27ae60",
            Tag::Bad => "#c0392b",
            Tag::Stop => "#2980b9",
        };
        s.push_str(&format!(
            "<circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"0.003\"/>\n",
            n.center[0], -n.center[1], n.radius
        ));
    }
    for b in &cover.stops {
        s.push_str(&format!(
            "<circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"#2980b933\" stroke=\"#2980b9\" stroke-width=\"0.003\"/>\n",
            b.center[0], -b.center[1], b.inflated_radius
        ));
    }
    s.push_str("</svg>\n");
    s
}

/// N(r) curve for a frequency profile.
pub fn profile_svg(profile: &FrequencyProfile) -> String {
    let recs: Vec<_> = profile.valid_records().collect();
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"400\" viewBox=\"0 0 640 400\">\n"
    );
    if recs.is_empty() {
        s.push_str("</svg>\n");
        return s;
    }
    let rmax = recs.iter().map(|r| r.r).fold(f64::MIN, f64::max);
    let nmax = recs.iter().map(|r| r.n).fold(f64::MIN, f64::max).max(1.0);
    let px = |r: f64| 40.0 + 560.0 * r / rmax;
    let py = |n: f64| 360.0 - 320.0 * n / (1.2 * nmax);
    s.push_str("<line x1=\"40\" y1=\"360\" x2=\"600\" y2=\"360\" stroke=\"#333\"/>\n");
    s.push_str("<line x1=\"40\" y1=\"40\" x2=\"40\" y2=\"360\" stroke=\"#333\"/>\n");
    let mut d = String::from("M");
    for rec in &recs {
        d.push_str(&format!(" {},{}", px(rec.r), py(rec.n)));
    }
    s.push_str(&format!(
        "<path d=\"{d}\" fill=\"none\" stroke=\"#2980b9\" stroke-width=\"2\"/>\n"
    ));
    for rec in &recs {
        s.push_str(&format!(
            "<circle cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"#2980b9\"/>\n",
            px(rec.r),
            py(rec.n)
        ));
    }
    s.push_str(&format!(
        "<text x=\"300\" y=\"390\" font-size=\"14\">r (N up to {nmax:.3})</text>\n"
    ));
    s.push_str("</svg>\n");
    s
}

/// Dots at arbitrary points (used for critical sets).
pub fn points_svg(domain: &ConvexDomain, points: &[Point], extent: f64) -> String {
    let mut s = header(extent);
    s.push_str(&polygon_path(
        &domain_polygon(domain, extent),
        "fill=\"#fdf6ec\" stroke=\"#555\" stroke-width=\"0.004\"",
    ));
    for p in points {
        s.push_str(&format!(
            "<circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"#8e44ad\"/>\n",
            p[0],
            -p[1],
            extent / 120.0
        ));
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles;

    #[test]
    fn svg_is_well_formed_ish() {
        let domain = oracles::wedge_domain(2.0 * std::f64::consts::PI / 3.0);
        let svg = strata_svg(&domain, &[], 1.0);
        assert!(svg.starts_with("<svg"));
        assert!(svg.ends_with("</svg>\n"));
        assert!(svg.contains("<path"));
    }
}
