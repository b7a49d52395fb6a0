//! File formats: binary PGM frames, CSV tables and the SVG trajectory plot.
//!
//! Every writer goes through [`write_atomic`], so a crashed run never
//! leaves a half-written file under the final name.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::embed::Embedding2D;
use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::ingest::{Contour, Mask};
use crate::metrics::MaskStack;
use crate::weights::WeightVector;

/// Writes `bytes` to a sibling temp file, then renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| Error::format("path", format!("{} has no file name", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(format!(".{}.tmp", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::Io(e)
    })
}

// ---------------------------------------------------------------- PGM

/// Encodes a mask as 8-bit binary PGM with foreground 255.
pub fn encode_pgm(mask: &Mask) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", mask.width(), mask.height()).into_bytes();
    out.extend(mask.data().iter().map(|&v| if v != 0 { 255u8 } else { 0 }));
    out
}

struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl HeaderCursor<'_> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::format("pgm", format!("bad {what} in header")))
    }
}

/// Decodes a P5 image; pixels above 127 are foreground. 16-bit images are
/// rejected.
pub fn decode_pgm(bytes: &[u8]) -> Result<Mask> {
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err(Error::format("pgm", "missing P5 magic"));
    }
    let mut cur = HeaderCursor { bytes, pos: 2 };
    let width = cur.number("width")?;
    let height = cur.number("height")?;
    let maxval = cur.number("maxval")?;
    if maxval == 0 || maxval > 255 {
        return Err(Error::format("pgm", format!("unsupported maxval {maxval}")));
    }
    // exactly one whitespace byte separates the header from the raster
    if cur.pos >= bytes.len() || !bytes[cur.pos].is_ascii_whitespace() {
        return Err(Error::format("pgm", "truncated header"));
    }
    let raster = &bytes[cur.pos + 1..];
    let need = width * height;
    if raster.len() < need {
        return Err(Error::format(
            "pgm",
            format!("raster has {} bytes, expected {need}", raster.len()),
        ));
    }
    let data = raster[..need].iter().map(|&v| u8::from(v > 127)).collect();
    Mask::new(width, height, data)
}

pub fn read_pgm(path: &Path) -> Result<Mask> {
    decode_pgm(&fs::read(path)?)
}

pub fn write_pgm(path: &Path, mask: &Mask) -> Result<()> {
    write_atomic(path, &encode_pgm(mask))
}

/// `*.pgm` files in `dir`, sorted by name.
pub fn list_frames(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && p.extension()
                    .is_some_and(|e| e.eq_ignore_ascii_case("pgm"))
        })
        .collect();
    files.sort();
    Ok(files)
}

/// Reads every frame of a directory into a stack. A directory without
/// frames yields an empty stack.
pub fn read_frame_dir(dir: &Path) -> Result<MaskStack> {
    let frames = list_frames(dir)?
        .iter()
        .map(|p| read_pgm(p))
        .collect::<Result<Vec<_>>>()?;
    MaskStack::new(frames)
}

pub fn frame_file_name(index: usize) -> String {
    format!("frame_{index:04}.pgm")
}

pub fn write_frame_dir(dir: &Path, stack: &MaskStack) -> Result<()> {
    fs::create_dir_all(dir)?;
    for (i, m) in stack.frames().iter().enumerate() {
        write_pgm(&dir.join(frame_file_name(i)), m)?;
    }
    Ok(())
}

// ---------------------------------------------------------------- CSV

#[derive(Debug, Serialize, Deserialize)]
struct ContourRow {
    t: usize,
    i: usize,
    x: f64,
    y: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct WeightRow {
    t: usize,
    w: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct FlagRow {
    t: usize,
    flag: u8,
}

#[derive(Debug, Serialize, Deserialize)]
struct EmbeddingRow {
    t: usize,
    x: f64,
    y: f64,
}

fn csv_error(what: &'static str) -> impl Fn(csv::Error) -> Error {
    move |e| Error::format(what, e.to_string())
}

fn to_csv<T: Serialize>(what: &'static str, rows: impl IntoIterator<Item = T>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(csv_error(what))?;
    }
    w.into_inner()
        .map_err(|e| Error::format(what, e.to_string()))
}

fn from_csv<T: for<'de> Deserialize<'de>>(what: &'static str, text: &[u8]) -> Result<Vec<T>> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text)
        .deserialize()
        .collect::<std::result::Result<Vec<T>, _>>()
        .map_err(csv_error(what))
}

/// Groups rows by `t` and checks that indices run 0, 1, 2, ... without gaps.
fn grouped<T>(what: &'static str, rows: Vec<(usize, usize, T)>) -> Result<Vec<Vec<T>>> {
    let mut out: Vec<Vec<T>> = Vec::new();
    for (t, i, v) in rows {
        if t == out.len() {
            out.push(Vec::new());
        } else if t + 1 != out.len() {
            return Err(Error::format(what, format!("frame index {t} out of order")));
        }
        let frame = out.last_mut().expect("pushed above");
        if i != frame.len() {
            return Err(Error::format(what, format!("point {i} out of order in frame {t}")));
        }
        frame.push(v);
    }
    Ok(out)
}

pub fn encode_contours_csv(contours: &[Contour]) -> Result<Vec<u8>> {
    to_csv(
        "contours csv",
        contours.iter().enumerate().flat_map(|(t, c)| {
            c.points()
                .iter()
                .enumerate()
                .map(move |(i, p)| ContourRow { t, i, x: p.x, y: p.y })
        }),
    )
}

pub fn decode_contours_csv(text: &[u8]) -> Result<Vec<Contour>> {
    let rows: Vec<ContourRow> = from_csv("contours csv", text)?;
    let frames = grouped(
        "contours csv",
        rows.into_iter()
            .map(|r| (r.t, r.i, Vec2::new(r.x, r.y)))
            .collect(),
    )?;
    Ok(frames.into_iter().map(Contour::new).collect())
}

pub fn write_contours_csv(path: &Path, contours: &[Contour]) -> Result<()> {
    write_atomic(path, &encode_contours_csv(contours)?)
}

pub fn read_contours_csv(path: &Path) -> Result<Vec<Contour>> {
    decode_contours_csv(&fs::read(path)?)
}

fn check_sequential(what: &'static str, ts: impl Iterator<Item = usize>) -> Result<()> {
    for (k, t) in ts.enumerate() {
        if k != t {
            return Err(Error::format(what, format!("row {k} has t = {t}")));
        }
    }
    Ok(())
}

pub fn encode_weights_csv(weights: &WeightVector) -> Result<Vec<u8>> {
    to_csv(
        "weights csv",
        weights
            .values()
            .iter()
            .enumerate()
            .map(|(t, &w)| WeightRow { t, w }),
    )
}

/// Weight values in frame order.
pub fn decode_weights_csv(text: &[u8]) -> Result<Vec<f64>> {
    let rows: Vec<WeightRow> = from_csv("weights csv", text)?;
    check_sequential("weights csv", rows.iter().map(|r| r.t))?;
    Ok(rows.into_iter().map(|r| r.w).collect())
}

pub fn write_weights_csv(path: &Path, weights: &WeightVector) -> Result<()> {
    write_atomic(path, &encode_weights_csv(weights)?)
}

pub fn read_weights_csv(path: &Path) -> Result<Vec<f64>> {
    decode_weights_csv(&fs::read(path)?)
}

/// Outlier flags, one row per frame; any nonzero flag marks an outlier.
pub fn decode_flags_csv(text: &[u8]) -> Result<Vec<bool>> {
    let rows: Vec<FlagRow> = from_csv("flags csv", text)?;
    check_sequential("flags csv", rows.iter().map(|r| r.t))?;
    Ok(rows.into_iter().map(|r| r.flag != 0).collect())
}

pub fn encode_flags_csv(flags: &[bool]) -> Result<Vec<u8>> {
    to_csv(
        "flags csv",
        flags.iter().enumerate().map(|(t, &f)| FlagRow {
            t,
            flag: u8::from(f),
        }),
    )
}

pub fn read_flags_csv(path: &Path) -> Result<Vec<bool>> {
    decode_flags_csv(&fs::read(path)?)
}

pub fn write_flags_csv(path: &Path, flags: &[bool]) -> Result<()> {
    write_atomic(path, &encode_flags_csv(flags)?)
}

pub fn encode_embedding_csv(embedding: &Embedding2D) -> Result<Vec<u8>> {
    to_csv(
        "embedding csv",
        embedding
            .coords
            .iter()
            .enumerate()
            .map(|(t, c)| EmbeddingRow { t, x: c.x, y: c.y }),
    )
}

pub fn decode_embedding_csv(text: &[u8]) -> Result<Vec<Vec2>> {
    let rows: Vec<EmbeddingRow> = from_csv("embedding csv", text)?;
    check_sequential("embedding csv", rows.iter().map(|r| r.t))?;
    Ok(rows.into_iter().map(|r| Vec2::new(r.x, r.y)).collect())
}

pub fn write_embedding_csv(path: &Path, embedding: &Embedding2D) -> Result<()> {
    write_atomic(path, &encode_embedding_csv(embedding)?)
}

pub fn read_embedding_csv(path: &Path) -> Result<Vec<Vec2>> {
    decode_embedding_csv(&fs::read(path)?)
}

// ---------------------------------------------------------------- SVG

/// The embedded trajectory as an SVG polyline with one labelled marker per
/// frame.
pub fn embedding_svg(embedding: &Embedding2D) -> String {
    const SIZE: f64 = 480.0;
    const MARGIN: f64 = 32.0;
    let pts = &embedding.coords;
    let (mut lo, mut hi) = (Vec2::new(f64::MAX, f64::MAX), Vec2::new(f64::MIN, f64::MIN));
    for p in pts {
        lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    let span = (hi.x - lo.x).max(hi.y - lo.y).max(1e-12);
    let scale = (SIZE - 2.0 * MARGIN) / span;
    // flip y so the plot reads with the usual upward axis
    let map = |p: &Vec2| (MARGIN + (p.x - lo.x) * scale, SIZE - MARGIN - (p.y - lo.y) * scale);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let line: Vec<String> = pts
        .iter()
        .map(|p| {
            let (x, y) = map(p);
            format!("{x:.2},{y:.2}")
        })
        .collect();
    let _ = writeln!(
        s,
        r#"<polyline fill="none" stroke="steelblue" stroke-width="1.5" points="{}"/>"#,
        line.join(" ")
    );
    for (t, p) in pts.iter().enumerate() {
        let (x, y) = map(p);
        let _ = writeln!(
            s,
            r#"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="darkorange"/><text x="{:.2}" y="{:.2}" font-size="9" font-family="sans-serif">{t}</text>"#,
            x + 4.0,
            y - 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{MARGIN}" y="16" font-size="11" font-family="sans-serif">stress {:.4}</text>"#,
        embedding.stress
    );
    s.push_str("</svg>\n");
    s
}

pub fn write_embedding_svg(path: &Path, embedding: &Embedding2D) -> Result<()> {
    write_atomic(path, embedding_svg(embedding).as_bytes())
}
