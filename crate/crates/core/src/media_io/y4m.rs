//! YUV4MPEG2 reader and writer.
//!
//! Reads `C444` and the `C420*` family (chroma upsampled bilinearly, center
//! sited). Always writes `C444` so the only loss is RGB/YUV rounding.

use std::fs;
use std::path::Path;

use super::color::{rgb_to_yuv, yuv_to_rgb};
use super::{Frame, FrameRate, FrameSequence, MediaError};

const SIGNATURE: &[u8] = b"YUV4MPEG2";
const FRAME_TAG: &[u8] = b"FRAME";
const MAX_HEADER_LEN: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Colorspace {
    C444,
    C420,
}

impl Colorspace {
    fn parse(tag: &str) -> Option<Self> {
        match tag {
            "444" => Some(Self::C444),
            "420" | "420jpeg" | "420paldv" | "420mpeg2" => Some(Self::C420),
            _ => None,
        }
    }

    fn chroma_dims(self, w: usize, h: usize) -> (usize, usize) {
        match self {
            Self::C444 => (w, h),
            Self::C420 => (w.div_ceil(2), h.div_ceil(2)),
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Header {
    width: u32,
    height: u32,
    rate: FrameRate,
    colorspace: Colorspace,
}

fn malformed(offset: usize, reason: impl Into<String>) -> MediaError {
    MediaError::MalformedHeader {
        offset,
        reason: reason.into(),
    }
}

fn find_newline(bytes: &[u8], from: usize, limit: usize) -> Option<usize> {
    let end = bytes.len().min(from.saturating_add(limit));
    bytes[from..end].iter().position(|&b| b == b'\n').map(|p| from + p)
}

fn parse_header(bytes: &[u8]) -> Result<(Header, usize), MediaError> {
    if bytes.len() < SIGNATURE.len() || &bytes[..SIGNATURE.len()] != SIGNATURE {
        return Err(malformed(0, "missing YUV4MPEG2 signature"));
    }
    let nl = find_newline(bytes, 0, MAX_HEADER_LEN)
        .ok_or_else(|| malformed(bytes.len().min(MAX_HEADER_LEN), "header line is not terminated"))?;
    let line = &bytes[..nl];
    let mut width = None;
    let mut height = None;
    let mut rate = None;
    let mut colorspace = Colorspace::C420;

    let mut offset = SIGNATURE.len();
    if offset < line.len() && line[offset] != b' ' {
        return Err(malformed(offset, "signature must be followed by a space"));
    }
    for token in line[SIGNATURE.len()..].split(|&b| b == b' ') {
        let token_offset = offset;
        offset += token.len() + 1;
        if token.is_empty() {
            continue;
        }
        let text = std::str::from_utf8(token)
            .map_err(|_| malformed(token_offset, "header parameter is not ASCII"))?;
        let (key, value) = text.split_at(1);
        match key {
            "W" => width = Some(parse_dim(value, token_offset, "W")?),
            "H" => height = Some(parse_dim(value, token_offset, "H")?),
            "F" => {
                let (n, d) = value
                    .split_once(':')
                    .ok_or_else(|| malformed(token_offset, format!("frame rate `{value}` is not n:d")))?;
                let n = n.parse::<u32>().ok();
                let d = d.parse::<u32>().ok();
                rate = match (n, d) {
                    (Some(n), Some(d)) => Some(
                        FrameRate::new(n, d).map_err(|_| malformed(token_offset, format!("invalid frame rate `{value}`")))?,
                    ),
                    _ => return Err(malformed(token_offset, format!("invalid frame rate `{value}`"))),
                };
            }
            "C" => {
                colorspace = Colorspace::parse(value).ok_or_else(|| MediaError::UnsupportedColorspace {
                    offset: token_offset,
                    tag: value.to_string(),
                })?;
            }
            // interlacing, pixel aspect and extensions carry nothing we use
            "I" | "A" | "X" => {}
            _ => return Err(malformed(token_offset, format!("unknown header parameter `{text}`"))),
        }
    }
    let width = width.ok_or_else(|| malformed(nl, "missing W parameter"))?;
    let height = height.ok_or_else(|| malformed(nl, "missing H parameter"))?;
    let rate = rate.ok_or_else(|| malformed(nl, "missing F parameter"))?;
    Ok((
        Header {
            width,
            height,
            rate,
            colorspace,
        },
        nl + 1,
    ))
}

fn parse_dim(value: &str, offset: usize, name: &str) -> Result<u32, MediaError> {
    match value.parse::<u32>() {
        Ok(v) if v > 0 => Ok(v),
        _ => Err(malformed(offset, format!("{name} must be a positive integer, got `{value}`"))),
    }
}

/// Decodes a YUV4MPEG2 stream. The sequence gets an empty `source_id`.
pub fn parse_y4m(bytes: &[u8]) -> Result<FrameSequence, MediaError> {
    parse_y4m_with_id(bytes, "")
}

pub fn parse_y4m_with_id(bytes: &[u8], source_id: &str) -> Result<FrameSequence, MediaError> {
    let (header, mut pos) = parse_header(bytes)?;
    let (w, h) = (header.width as usize, header.height as usize);
    let (cw, ch) = header.colorspace.chroma_dims(w, h);
    let payload_len = w * h + 2 * cw * ch;

    let mut frames = Vec::new();
    while pos < bytes.len() {
        if bytes.len() - pos < FRAME_TAG.len() || &bytes[pos..pos + FRAME_TAG.len()] != FRAME_TAG {
            return Err(MediaError::MalformedFrame {
                offset: pos,
                reason: "expected FRAME record".into(),
            });
        }
        let nl = find_newline(bytes, pos, MAX_HEADER_LEN).ok_or(MediaError::TruncatedFrame {
            offset: pos,
            expected: FRAME_TAG.len() + 1,
            available: bytes.len() - pos,
        })?;
        let after_tag = pos + FRAME_TAG.len();
        if after_tag < nl && bytes[after_tag] != b' ' {
            return Err(MediaError::MalformedFrame {
                offset: after_tag,
                reason: "FRAME tag must be followed by a space or newline".into(),
            });
        }
        let start = nl + 1;
        let available = bytes.len() - start;
        if available < payload_len {
            return Err(MediaError::TruncatedFrame {
                offset: start,
                expected: payload_len,
                available,
            });
        }
        let payload = &bytes[start..start + payload_len];
        frames.push(decode_planes(payload, &header, frames.len()));
        pos = start + payload_len;
    }
    FrameSequence::new(frames, header.rate, source_id)
}

fn decode_planes(payload: &[u8], header: &Header, index: usize) -> Frame {
    let (w, h) = (header.width as usize, header.height as usize);
    let (cw, ch) = header.colorspace.chroma_dims(w, h);
    let (y_plane, rest) = payload.split_at(w * h);
    let (u_plane, v_plane) = rest.split_at(cw * ch);
    let mut pixels = Vec::with_capacity(w * h * 3);
    match header.colorspace {
        Colorspace::C444 => {
            for i in 0..w * h {
                pixels.extend_from_slice(&yuv_to_rgb(y_plane[i] as f64, u_plane[i] as f64, v_plane[i] as f64));
            }
        }
        Colorspace::C420 => {
            let sample = |plane: &[u8], x: usize, y: usize| -> f64 {
                // chroma sample (i, j) sits at luma position (2i + 0.5, 2j + 0.5)
                let fx = ((x as f64 - 0.5) / 2.0).clamp(0.0, (cw - 1) as f64);
                let fy = ((y as f64 - 0.5) / 2.0).clamp(0.0, (ch - 1) as f64);
                let (x0, y0) = (fx.floor() as usize, fy.floor() as usize);
                let (x1, y1) = ((x0 + 1).min(cw - 1), (y0 + 1).min(ch - 1));
                let (ax, ay) = (fx - x0 as f64, fy - y0 as f64);
                let at = |xx: usize, yy: usize| plane[yy * cw + xx] as f64;
                let top = at(x0, y0) * (1.0 - ax) + at(x1, y0) * ax;
                let bottom = at(x0, y1) * (1.0 - ax) + at(x1, y1) * ax;
                top * (1.0 - ay) + bottom * ay
            };
            for y in 0..h {
                for x in 0..w {
                    let luma = y_plane[y * w + x] as f64;
                    pixels.extend_from_slice(&yuv_to_rgb(luma, sample(u_plane, x, y), sample(v_plane, x, y)));
                }
            }
        }
    }
    Frame::new(header.width, header.height, pixels, index).expect("plane sizes follow the header")
}

/// Encodes a sequence as a `C444` YUV4MPEG2 stream.
pub fn write_y4m(seq: &FrameSequence) -> Result<Vec<u8>, MediaError> {
    let (w, h) = seq.dimensions().ok_or(MediaError::EmptySequence)?;
    let rate = seq.frame_rate();
    let header = format!("YUV4MPEG2 W{w} H{h} F{}:{} C444\n", rate.num(), rate.den());
    let plane = w as usize * h as usize;
    let mut out = Vec::with_capacity(header.len() + seq.len() * (6 + 3 * plane));
    out.extend_from_slice(header.as_bytes());
    let mut planes = vec![0u8; 3 * plane];
    for frame in seq.frames() {
        for (i, px) in frame.pixels().chunks_exact(3).enumerate() {
            let yuv = rgb_to_yuv([px[0], px[1], px[2]]);
            planes[i] = yuv[0];
            planes[plane + i] = yuv[1];
            planes[2 * plane + i] = yuv[2];
        }
        out.extend_from_slice(b"FRAME\n");
        out.extend_from_slice(&planes);
    }
    Ok(out)
}

/// Reads a `.y4m` file; the file stem becomes the `source_id`.
pub fn read_y4m_file(path: &Path) -> Result<FrameSequence, MediaError> {
    let bytes = fs::read(path).map_err(|source| MediaError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let id = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    parse_y4m_with_id(&bytes, &id)
}

pub fn write_y4m_file(seq: &FrameSequence, path: &Path) -> Result<(), MediaError> {
    let bytes = write_y4m(seq)?;
    fs::write(path, bytes).map_err(|source| MediaError::Io {
        path: path.to_path_buf(),
        source,
    })
}
