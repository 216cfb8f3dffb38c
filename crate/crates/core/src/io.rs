//! JSON, CSV and SVG writers.
//!
//! Every floating-point number is written with 17 significant digits
//! (`{:.16e}`), which round-trips any `f64` exactly.

use std::io::Write;

use serde::Serialize;
use serde_json::ser::Formatter;

use crate::error::{Error, Result};
use crate::geometry::{CrossSection, ProfilePoint};
use crate::oracle::PolygonFrame;

/// `x` with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

struct Precise;

impl Formatter for Precise {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        writer.write_all(fmt_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

/// Single-line JSON with full-precision floats.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Precise);
    value.serialize(&mut ser).map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// Writes `header` and `rows` as CSV.
pub fn write_csv<W: Write>(out: W, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(csv_error)?;
    for row in rows {
        w.write_record(row).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// Cross-section vertices as `chain,theta,x1,x2` rows.
pub fn cross_section_csv<W: Write>(out: W, cs: &CrossSection) -> Result<()> {
    let rows: Vec<Vec<String>> = [("left", &cs.left), ("right", &cs.right)]
        .into_iter()
        .flat_map(|(name, pts)| {
            pts.iter().map(move |q| vec![name.to_string(), fmt_f64(q.theta), fmt_f64(q.x1), fmt_f64(q.x2)])
        })
        .collect();
    write_csv(out, &["chain", "theta", "x1", "x2"], &rows)
}

/// Polygon flow frames as `step,vertex,x1,x2` rows. Right-chain vertices are
/// numbered after the left chain's.
pub fn polygon_frames_csv<W: Write>(out: W, frames: &[PolygonFrame]) -> Result<()> {
    let mut rows = Vec::new();
    for f in frames {
        for (k, q) in f.left.iter().chain(&f.right).enumerate() {
            rows.push(vec![f.step.to_string(), k.to_string(), fmt_f64(q[0]), fmt_f64(q[1])]);
        }
    }
    write_csv(out, &["step", "vertex", "x1", "x2"], &rows)
}

const SVG_SIZE: f64 = 600.0;
const SVG_MARGIN: f64 = 30.0;

/// SVG drawing of a cross-section: both cap arcs, the axis `x₁ = 0`, and the
/// interface segments dashed.
pub fn cross_section_svg(cs: &CrossSection) -> String {
    let all = cs.left.iter().chain(&cs.right);
    let (mut x0, mut x1, mut y0, mut y1) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for q in all {
        x0 = x0.min(q.x1);
        x1 = x1.max(q.x1);
        y0 = y0.min(q.x2);
        y1 = y1.max(q.x2);
    }
    let scale = (SVG_SIZE - 2.0 * SVG_MARGIN) / (x1 - x0).max(y1 - y0).max(f64::MIN_POSITIVE);
    let width = (x1 - x0) * scale + 2.0 * SVG_MARGIN;
    let height = (y1 - y0) * scale + 2.0 * SVG_MARGIN;
    let px = |x: f64| SVG_MARGIN + (x - x0) * scale;
    let py = |y: f64| SVG_MARGIN + (y1 - y) * scale;
    let polyline = |pts: &[ProfilePoint], color: &str| {
        let coords: Vec<String> = pts.iter().map(|q| format!("{:.3},{:.3}", px(q.x1), py(q.x2))).collect();
        format!(
            "  <polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"2\"/>\n",
            coords.join(" ")
        )
    };
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" viewBox=\"0 0 {width:.3} {height:.3}\">\n"
    );
    svg += &format!(
        "  <line x1=\"{:.3}\" y1=\"0\" x2=\"{:.3}\" y2=\"{height:.3}\" stroke=\"gray\" stroke-width=\"1\"/>\n",
        px(0.0),
        px(0.0)
    );
    svg += &polyline(&cs.left, "steelblue");
    svg += &polyline(&cs.right, "firebrick");
    if !cs.interface.is_empty() {
        for sign in [1.0, -1.0] {
            svg += &format!(
                "  <line x1=\"{:.3}\" y1=\"{:.3}\" x2=\"{:.3}\" y2=\"{:.3}\" stroke=\"black\" stroke-width=\"3\" stroke-dasharray=\"6 4\"/>\n",
                px(0.0),
                py(sign * cs.interface.inner),
                px(0.0),
                py(sign * cs.interface.outer)
            );
        }
    }
    svg += "</svg>\n";
    svg
}
