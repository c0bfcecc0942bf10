//! Frame ingestion/emission (binary P6 rasters), NTXY trajectory
//! serialization, and the deterministic synthetic-scene generator.
//!
//! File formats are bit-exact contracts: P6 is `"P6\n<w> <h>\n255\n"` plus
//! raw RGB bytes, NTXY is `N,T,X,Y` lines with 2-decimal coordinates, no
//! header, LF endings. Scene specs are line-based `key = value` text with
//! repeated `[actor]` blocks (grammar documented in the repository README).

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// Default zero-padded filename pattern for frame sequences.
pub const DEFAULT_FRAME_PATTERN: &str = "frame_%06d.ppm";

/// One raster frame: row-major RGB, 8 bits per channel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    width: u32,
    height: u32,
    index: u32,
    pixels: Vec<u8>,
}

impl Frame {
    /// Builds a frame, enforcing `pixels.len() == width * height * 3`.
    pub fn new(width: u32, height: u32, index: u32, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Decode {
                offset: 0,
                reason: format!("dimensions must be positive, got {width}x{height}"),
            });
        }
        let expected = width as usize * height as usize * 3;
        if pixels.len() != expected {
            return Err(Error::Decode {
                offset: 0,
                reason: format!("pixel buffer is {} bytes, expected {expected}", pixels.len()),
            });
        }
        Ok(Self { width, height, index, pixels })
    }

    /// Uniform-color frame, handy for tests and the scene generator.
    pub fn filled(width: u32, height: u32, index: u32, rgb: (u8, u8, u8)) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width as usize * height as usize * 3);
        for _ in 0..width as usize * height as usize {
            pixels.extend_from_slice(&[rgb.0, rgb.1, rgb.2]);
        }
        Self::new(width, height, index, pixels)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    /// Frame number within its sequence.
    pub fn index(&self) -> u32 {
        self.index
    }

    pub fn set_index(&mut self, index: u32) {
        self.index = index;
    }

    /// Raw row-major RGB bytes.
    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    /// RGB triple at (x, y); panics when out of bounds.
    pub fn rgb_at(&self, x: u32, y: u32) -> (u8, u8, u8) {
        assert!(x < self.width && y < self.height, "pixel ({x}, {y}) out of bounds");
        let off = (y as usize * self.width as usize + x as usize) * 3;
        (self.pixels[off], self.pixels[off + 1], self.pixels[off + 2])
    }

    fn put_rgb(&mut self, x: u32, y: u32, rgb: (u8, u8, u8)) {
        let off = (y as usize * self.width as usize + x as usize) * 3;
        self.pixels[off] = rgb.0;
        self.pixels[off + 1] = rgb.1;
        self.pixels[off + 2] = rgb.2;
    }
}

/// One NTXY row: object identifier, frame number, image coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRecord {
    pub n: u32,
    pub t: u32,
    pub x: f64,
    pub y: f64,
}

impl TrajectoryRecord {
    pub fn new(n: u32, t: u32, x: f64, y: f64) -> Self {
        Self { n, t, x, y }
    }
}

// ---------------------------------------------------------------------------
// P6 raster codec
// ---------------------------------------------------------------------------

/// Decodes a binary P6 raster. The frame index is set to 0; sequence loaders
/// overwrite it from the filename.
pub fn decode_frame(bytes: &[u8]) -> Result<Frame> {
    if bytes.len() < 2 || &bytes[0..2] != b"P6" {
        return Err(Error::Decode { offset: 0, reason: "expected magic \"P6\"".to_string() });
    }
    let mut pos = 2usize;
    let width = read_header_int(bytes, &mut pos, "width")?;
    let height = read_header_int(bytes, &mut pos, "height")?;
    let maxval_offset = skip_whitespace(bytes, pos);
    let maxval = read_header_int(bytes, &mut pos, "max value")?;
    if maxval != 255 {
        return Err(Error::Decode {
            offset: maxval_offset,
            reason: format!("max value must be 255, got {maxval}"),
        });
    }
    // Exactly one whitespace byte separates the header from the pixel data.
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(Error::Decode {
            offset: pos,
            reason: "expected single whitespace byte after max value".to_string(),
        });
    }
    pos += 1;
    if width == 0 || height == 0 {
        return Err(Error::Decode {
            offset: 2,
            reason: format!("dimensions must be positive, got {width}x{height}"),
        });
    }
    let expected = width as usize * height as usize * 3;
    let available = bytes.len() - pos;
    if available < expected {
        return Err(Error::Decode {
            offset: bytes.len(),
            reason: format!("truncated pixel data: expected {expected} bytes, got {available}"),
        });
    }
    if available > expected {
        return Err(Error::Decode {
            offset: pos + expected,
            reason: format!("{} trailing bytes after pixel data", available - expected),
        });
    }
    Frame::new(width, height, 0, bytes[pos..].to_vec())
}

/// Encodes the canonical P6 form: `"P6\n<w> <h>\n255\n"` + pixel bytes.
pub fn encode_frame(frame: &Frame) -> Vec<u8> {
    let header = format!("P6\n{} {}\n255\n", frame.width, frame.height);
    let mut out = Vec::with_capacity(header.len() + frame.pixels.len());
    out.extend_from_slice(header.as_bytes());
    out.extend_from_slice(&frame.pixels);
    out
}

fn skip_whitespace(bytes: &[u8], mut pos: usize) -> usize {
    while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
        pos += 1;
    }
    pos
}

fn read_header_int(bytes: &[u8], pos: &mut usize, what: &str) -> Result<u32> {
    *pos = skip_whitespace(bytes, *pos);
    let start = *pos;
    while *pos < bytes.len() && bytes[*pos].is_ascii_digit() {
        *pos += 1;
    }
    if *pos == start {
        return Err(Error::Decode { offset: start, reason: format!("expected {what}") });
    }
    let text = std::str::from_utf8(&bytes[start..*pos]).expect("digits are ASCII");
    text.parse::<u32>()
        .map_err(|_| Error::Decode { offset: start, reason: format!("{what} out of range") })
}

// ---------------------------------------------------------------------------
// Frame sequences on disk
// ---------------------------------------------------------------------------

struct FramePattern {
    prefix: String,
    digits: usize,
    suffix: String,
}

impl FramePattern {
    fn parse(pattern: &str) -> Result<Self> {
        let start = pattern.find("%0").ok_or_else(|| Error::Config {
            key: "pattern".to_string(),
            reason: format!("expected a %0<n>d placeholder in {pattern:?}"),
        })?;
        let rest = &pattern[start + 2..];
        let d_pos = rest.find('d').ok_or_else(|| Error::Config {
            key: "pattern".to_string(),
            reason: format!("expected a %0<n>d placeholder in {pattern:?}"),
        })?;
        let digits: usize = rest[..d_pos].parse().map_err(|_| Error::Config {
            key: "pattern".to_string(),
            reason: format!("bad placeholder width in {pattern:?}"),
        })?;
        Ok(Self {
            prefix: pattern[..start].to_string(),
            digits,
            suffix: rest[d_pos + 1..].to_string(),
        })
    }

    fn format(&self, index: u32) -> String {
        format!("{}{:0width$}{}", self.prefix, index, self.suffix, width = self.digits)
    }

    fn match_index(&self, name: &str) -> Option<u32> {
        let middle = name.strip_prefix(&self.prefix)?.strip_suffix(&self.suffix)?;
        if middle.len() < self.digits || !middle.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        middle.parse().ok()
    }
}

/// Loads `frame_000000.ppm`-style sequences in ascending index order.
///
/// Indices must start at 0 with no gaps; the first missing index is reported.
/// An empty directory yields an empty sequence.
pub fn load_sequence(dir: &Path, pattern: &str) -> Result<Vec<Frame>> {
    let pattern = FramePattern::parse(pattern)?;
    let mut found: Vec<(u32, String)> = Vec::new();
    for entry in fs::read_dir(dir)? {
        let entry = entry?;
        let name = entry.file_name();
        let name = match name.to_str() {
            Some(n) => n,
            None => continue,
        };
        if let Some(index) = pattern.match_index(name) {
            found.push((index, name.to_string()));
        }
    }
    found.sort_unstable();
    for (expected, &(index, _)) in found.iter().enumerate() {
        if index != expected as u32 {
            return Err(Error::MissingFrameIndex { index: expected as u32 });
        }
    }

    let mut frames = Vec::with_capacity(found.len());
    for (index, name) in found {
        let bytes = fs::read(dir.join(&name))?;
        let mut frame = decode_frame(&bytes)?;
        frame.set_index(index);
        if let Some(first) = frames.first() {
            let first: &Frame = first;
            if frame.width != first.width || frame.height != first.height {
                return Err(Error::MixedDimensions {
                    index,
                    width: first.width,
                    height: first.height,
                    got_width: frame.width,
                    got_height: frame.height,
                });
            }
        }
        frames.push(frame);
    }
    Ok(frames)
}

/// Writes a frame sequence as P6 files named by `pattern` under `dir`.
pub fn write_sequence(dir: &Path, pattern: &str, frames: &[Frame]) -> Result<()> {
    let pattern = FramePattern::parse(pattern)?;
    fs::create_dir_all(dir)?;
    for frame in frames {
        fs::write(dir.join(pattern.format(frame.index)), encode_frame(frame))?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// NTXY serialization
// ---------------------------------------------------------------------------

/// Formats records as NTXY text: one `N,T,X,Y` line per record, coordinates
/// with fixed 2-decimal precision, no header.
pub fn format_ntxy(records: &[TrajectoryRecord]) -> String {
    let mut out = String::with_capacity(records.len() * 24);
    for r in records {
        writeln!(out, "{},{},{:.2},{:.2}", r.n, r.t, r.x, r.y).expect("string write");
    }
    out
}

/// Writes NTXY text to `dest`; returns the number of bytes written.
/// Records are expected sorted by (n, t).
pub fn write_ntxy(records: &[TrajectoryRecord], dest: &mut dyn Write) -> Result<usize> {
    let text = format_ntxy(records);
    dest.write_all(text.as_bytes())?;
    Ok(text.len())
}

/// Convenience wrapper writing NTXY to a file path.
pub fn write_ntxy_file(records: &[TrajectoryRecord], path: &Path) -> Result<usize> {
    let mut file = fs::File::create(path)?;
    write_ntxy(records, &mut file)
}

/// Parses NTXY text; blank lines are ignored, records come back in file
/// order. Errors carry the 1-based line number.
pub fn parse_ntxy(bytes: &[u8]) -> Result<Vec<TrajectoryRecord>> {
    let text = std::str::from_utf8(bytes)
        .map_err(|_| Error::NtxyParse { line: 0, reason: "not valid UTF-8".to_string() })?;
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(Error::NtxyParse {
                line: line_no,
                reason: format!("expected 4 comma-separated fields, got {}", fields.len()),
            });
        }
        let parse_err = |what: &str, value: &str| Error::NtxyParse {
            line: line_no,
            reason: format!("{what} is not numeric: {value:?}"),
        };
        let n = fields[0].trim().parse::<u32>().map_err(|_| parse_err("N", fields[0]))?;
        let t = fields[1].trim().parse::<u32>().map_err(|_| parse_err("T", fields[1]))?;
        let x = fields[2].trim().parse::<f64>().map_err(|_| parse_err("X", fields[2]))?;
        let y = fields[3].trim().parse::<f64>().map_err(|_| parse_err("Y", fields[3]))?;
        records.push(TrajectoryRecord { n, t, x, y });
    }
    Ok(records)
}

// ---------------------------------------------------------------------------
// Synthetic scenes
// ---------------------------------------------------------------------------

/// One synthetic actor: a filled axis-aligned rectangle of uniform color
/// moving linearly, active on frames `enter_frame <= t < exit_frame`.
#[derive(Debug, Clone, PartialEq)]
pub struct Actor {
    pub color: (u8, u8, u8),
    /// Rectangle center at frame 0, in pixels.
    pub start: (f64, f64),
    /// Center displacement per frame, in pixels.
    pub velocity: (f64, f64),
    /// Rectangle width and height in pixels.
    pub size: (u32, u32),
    pub enter_frame: u32,
    pub exit_frame: u32,
}

impl Actor {
    fn active(&self, t: u32) -> bool {
        self.enter_frame <= t && t < self.exit_frame
    }

    /// Rectangle center at frame t.
    pub fn center(&self, t: u32) -> (f64, f64) {
        (self.start.0 + t as f64 * self.velocity.0, self.start.1 + t as f64 * self.velocity.1)
    }

    /// Integer pixel bounds at frame t, before clipping: (left, top).
    fn top_left(&self, t: u32) -> (i64, i64) {
        let (cx, cy) = self.center(t);
        (
            (cx - self.size.0 as f64 / 2.0).round() as i64,
            (cy - self.size.1 as f64 / 2.0).round() as i64,
        )
    }
}

/// Declarative description of a synthetic scene.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneSpec {
    pub width: u32,
    pub height: u32,
    pub background_color: (u8, u8, u8),
    /// Total frame count; frames are indexed 0..duration.
    pub duration: u32,
    pub actors: Vec<Actor>,
    pub seed: u64,
}

impl SceneSpec {
    pub fn validate(&self) -> Result<()> {
        let err = |key: &str, reason: String| Error::SceneSpec { key: key.to_string(), reason };
        if self.width == 0 {
            return Err(err("width", "must be >= 1".to_string()));
        }
        if self.height == 0 {
            return Err(err("height", "must be >= 1".to_string()));
        }
        if self.duration == 0 {
            return Err(err("duration", "must be >= 1".to_string()));
        }
        for (i, actor) in self.actors.iter().enumerate() {
            if actor.size.0 == 0 || actor.size.1 == 0 {
                return Err(err(
                    &format!("actor[{i}].size"),
                    format!("width and height must be >= 1, got {}x{}", actor.size.0, actor.size.1),
                ));
            }
            if actor.enter_frame > actor.exit_frame {
                return Err(err(
                    &format!("actor[{i}].enter"),
                    format!(
                        "enter frame {} exceeds exit frame {}",
                        actor.enter_frame, actor.exit_frame
                    ),
                ));
            }
            if actor.exit_frame > self.duration {
                return Err(err(
                    &format!("actor[{i}].exit"),
                    format!("exit frame {} exceeds duration {}", actor.exit_frame, self.duration),
                ));
            }
            let on_canvas_somewhere = (actor.enter_frame..actor.exit_frame).any(|t| {
                let (left, top) = actor.top_left(t);
                let right = left + actor.size.0 as i64;
                let bottom = top + actor.size.1 as i64;
                right > 0 && bottom > 0 && left < self.width as i64 && top < self.height as i64
            });
            if actor.enter_frame < actor.exit_frame && !on_canvas_somewhere {
                return Err(err(
                    &format!("actor[{i}].start"),
                    "actor lies fully outside the canvas for its entire active range".to_string(),
                ));
            }
        }
        Ok(())
    }

    /// Renders the scene. Output is a pure function of the spec: same spec,
    /// byte-identical frames. Later-listed actors draw on top. Ground truth
    /// carries one record per actor per active frame (center coordinates).
    pub fn generate(&self) -> Result<(Vec<Frame>, Vec<TrajectoryRecord>)> {
        self.validate()?;
        let mut frames = Vec::with_capacity(self.duration as usize);
        for t in 0..self.duration {
            let mut frame = Frame::filled(self.width, self.height, t, self.background_color)?;
            for actor in &self.actors {
                if !actor.active(t) {
                    continue;
                }
                let (left, top) = actor.top_left(t);
                let x0 = left.max(0) as u32;
                let y0 = top.max(0) as u32;
                let x1 = (left + actor.size.0 as i64).clamp(0, self.width as i64) as u32;
                let y1 = (top + actor.size.1 as i64).clamp(0, self.height as i64) as u32;
                for y in y0..y1 {
                    for x in x0..x1 {
                        frame.put_rgb(x, y, actor.color);
                    }
                }
            }
            frames.push(frame);
        }
        let mut gt = Vec::new();
        for (i, actor) in self.actors.iter().enumerate() {
            for t in actor.enter_frame..actor.exit_frame {
                let (cx, cy) = actor.center(t);
                gt.push(TrajectoryRecord::new(i as u32, t, cx, cy));
            }
        }
        Ok((frames, gt))
    }
}

/// Spec-level convenience mirroring [`SceneSpec::generate`].
pub fn generate_scene(spec: &SceneSpec) -> Result<(Vec<Frame>, Vec<TrajectoryRecord>)> {
    spec.generate()
}

// ---------------------------------------------------------------------------
// Scene spec text format
// ---------------------------------------------------------------------------

const SCENE_GLOBAL_KEYS: &[&str] = &["width", "height", "duration", "background", "seed"];
const SCENE_ACTOR_KEYS: &[&str] = &["color", "start", "velocity", "size", "enter", "exit"];

/// Parses the line-based scene spec format: global `key = value` lines, then
/// one `[actor]` block per actor. `#` starts a comment line.
pub fn parse_scene_spec(text: &str) -> Result<SceneSpec> {
    let err = |key: &str, reason: String| Error::SceneSpec { key: key.to_string(), reason };

    struct ActorDraft {
        color: Option<(u8, u8, u8)>,
        start: Option<(f64, f64)>,
        velocity: (f64, f64),
        size: Option<(u32, u32)>,
        enter: u32,
        exit: Option<u32>,
    }
    let new_draft = || ActorDraft {
        color: None,
        start: None,
        velocity: (0.0, 0.0),
        size: None,
        enter: 0,
        exit: None,
    };

    let mut width: Option<u32> = None;
    let mut height: Option<u32> = None;
    let mut duration: Option<u32> = None;
    let mut background = (0u8, 0u8, 0u8);
    let mut seed = 0u64;
    let mut drafts: Vec<ActorDraft> = Vec::new();
    let mut in_actor = false;

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line == "[actor]" {
            drafts.push(new_draft());
            in_actor = true;
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            err("line", format!("line {line_no}: expected \"key = value\", got {line:?}"))
        })?;
        let key = key.trim();
        let value = value.trim();
        let bad = |reason: &str| err(key, format!("line {line_no}: {reason}: {value:?}"));

        if in_actor {
            let draft = drafts.last_mut().expect("in_actor implies a draft");
            match key {
                "color" => {
                    let v = parse_numbers::<u8>(value, 3).map_err(|r| bad(&r))?;
                    draft.color = Some((v[0], v[1], v[2]));
                }
                "start" => {
                    let v = parse_numbers::<f64>(value, 2).map_err(|r| bad(&r))?;
                    draft.start = Some((v[0], v[1]));
                }
                "velocity" => {
                    let v = parse_numbers::<f64>(value, 2).map_err(|r| bad(&r))?;
                    draft.velocity = (v[0], v[1]);
                }
                "size" => {
                    let v = parse_numbers::<u32>(value, 2).map_err(|r| bad(&r))?;
                    draft.size = Some((v[0], v[1]));
                }
                "enter" => draft.enter = value.parse().map_err(|_| bad("expected an integer"))?,
                "exit" => {
                    draft.exit = Some(value.parse().map_err(|_| bad("expected an integer"))?)
                }
                other => {
                    return Err(err(
                        other,
                        format!(
                            "line {line_no}: unknown actor key (valid: {})",
                            SCENE_ACTOR_KEYS.join(", ")
                        ),
                    ))
                }
            }
        } else {
            match key {
                "width" => width = Some(value.parse().map_err(|_| bad("expected an integer"))?),
                "height" => height = Some(value.parse().map_err(|_| bad("expected an integer"))?),
                "duration" => {
                    duration = Some(value.parse().map_err(|_| bad("expected an integer"))?)
                }
                "background" => {
                    let v = parse_numbers::<u8>(value, 3).map_err(|r| bad(&r))?;
                    background = (v[0], v[1], v[2]);
                }
                "seed" => seed = value.parse().map_err(|_| bad("expected an integer"))?,
                other => {
                    return Err(err(
                        other,
                        format!(
                            "line {line_no}: unknown key (valid: {})",
                            SCENE_GLOBAL_KEYS.join(", ")
                        ),
                    ))
                }
            }
        }
    }

    let width = width.ok_or_else(|| err("width", "missing required key".to_string()))?;
    let height = height.ok_or_else(|| err("height", "missing required key".to_string()))?;
    let duration = duration.ok_or_else(|| err("duration", "missing required key".to_string()))?;

    let mut actors = Vec::with_capacity(drafts.len());
    for (i, draft) in drafts.into_iter().enumerate() {
        let missing =
            |key: &str| err(&format!("actor[{i}].{key}"), "missing required key".to_string());
        actors.push(Actor {
            color: draft.color.ok_or_else(|| missing("color"))?,
            start: draft.start.ok_or_else(|| missing("start"))?,
            velocity: draft.velocity,
            size: draft.size.ok_or_else(|| missing("size"))?,
            enter_frame: draft.enter,
            exit_frame: draft.exit.unwrap_or(duration),
        });
    }

    let spec =
        SceneSpec { width, height, background_color: background, duration, actors, seed };
    spec.validate()?;
    Ok(spec)
}

fn parse_numbers<T: std::str::FromStr>(value: &str, count: usize) -> std::result::Result<Vec<T>, String> {
    let parts: Vec<&str> = value.split_whitespace().collect();
    if parts.len() != count {
        return Err(format!("expected {count} space-separated numbers"));
    }
    parts
        .iter()
        .map(|p| p.parse::<T>().map_err(|_| format!("could not parse {p:?}")))
        .collect()
}
