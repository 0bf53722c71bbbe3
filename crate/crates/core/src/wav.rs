//! Minimal RIFF/WAVE reader and writer.
//!
//! Supports little-endian PCM (format code 1) at 16, 24, and 32 bits per
//! sample and IEEE float (format code 3) at 32 bits, mono or stereo. `fact`,
//! `LIST`, and other auxiliary chunks are skipped, as are `fmt ` extension
//! bytes. Integer samples decode to amplitude by division by 2^(bits-1), so
//! decoded values always lie in [-1.0, 1.0).

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{ByteOrder, LittleEndian, WriteBytesExt};

use crate::audio::AudioBuffer;
use crate::error::{Error, Result, Warning, WarningKind};

/// Sample encodings `write_wav` can produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BitDepth {
    Int16,
    Int24,
    Float32,
}

impl BitDepth {
    fn bits(self) -> u16 {
        match self {
            BitDepth::Int16 => 16,
            BitDepth::Int24 => 24,
            BitDepth::Float32 => 32,
        }
    }

    fn format_code(self) -> u16 {
        match self {
            BitDepth::Float32 => 3,
            _ => 1,
        }
    }
}

const FORMAT_PCM: u16 = 1;
const FORMAT_IEEE_FLOAT: u16 = 3;

struct FmtChunk {
    format: u16,
    channels: u16,
    sample_rate: u32,
    bits_per_sample: u16,
}

/// Decodes a WAV file into a normalized [`AudioBuffer`].
pub fn read_wav(path: impl AsRef<Path>) -> Result<AudioBuffer> {
    let mut reader = BufReader::new(File::open(path)?);
    let mut header = [0u8; 12];
    reader
        .read_exact(&mut header)
        .map_err(|_| Error::MalformedContainer("file shorter than a RIFF header".into()))?;
    if &header[0..4] != b"RIFF" {
        return Err(Error::MalformedContainer("missing RIFF tag".into()));
    }
    if &header[8..12] != b"WAVE" {
        return Err(Error::MalformedContainer("missing WAVE tag".into()));
    }

    let mut fmt: Option<FmtChunk> = None;
    let mut data: Option<Vec<u8>> = None;
    let mut chunk_header = [0u8; 8];
    loop {
        match reader.read_exact(&mut chunk_header) {
            Ok(()) => {}
            Err(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => break,
            Err(e) => return Err(e.into()),
        }
        let id = [
            chunk_header[0],
            chunk_header[1],
            chunk_header[2],
            chunk_header[3],
        ];
        let size = LittleEndian::read_u32(&chunk_header[4..8]) as usize;
        match &id {
            b"fmt " => {
                if size < 16 {
                    return Err(Error::MalformedContainer(format!(
                        "fmt chunk of {size} bytes; need at least 16"
                    )));
                }
                let mut body = vec![0u8; size];
                reader.read_exact(&mut body).map_err(|_| {
                    Error::MalformedContainer("fmt chunk truncated".into())
                })?;
                fmt = Some(FmtChunk {
                    format: LittleEndian::read_u16(&body[0..2]),
                    channels: LittleEndian::read_u16(&body[2..4]),
                    sample_rate: LittleEndian::read_u32(&body[4..8]),
                    bits_per_sample: LittleEndian::read_u16(&body[14..16]),
                });
            }
            b"data" => {
                let mut body = vec![0u8; size];
                reader.read_exact(&mut body).map_err(|_| {
                    Error::MalformedContainer("data chunk truncated".into())
                })?;
                data = Some(body);
            }
            _ => {
                // fact, LIST, cue, bext, ... all skipped
                let mut body = vec![0u8; size];
                reader.read_exact(&mut body).map_err(|_| {
                    Error::MalformedContainer("auxiliary chunk truncated".into())
                })?;
            }
        }
        if size % 2 == 1 {
            let mut pad = [0u8; 1];
            // A missing pad byte at EOF is tolerated; some writers omit it.
            let _ = reader.read_exact(&mut pad);
        }
        if fmt.is_some() && data.is_some() {
            break;
        }
    }

    let fmt = fmt.ok_or_else(|| Error::MalformedContainer("no fmt chunk".into()))?;
    let data = data.ok_or_else(|| Error::MalformedContainer("no data chunk".into()))?;

    if fmt.channels == 0 || fmt.channels > 2 {
        return Err(Error::UnsupportedChannelCount(fmt.channels as usize));
    }
    if fmt.sample_rate == 0 {
        return Err(Error::MalformedContainer("zero sample rate".into()));
    }
    let bytes_per_sample = match (fmt.format, fmt.bits_per_sample) {
        (FORMAT_PCM, 16) => 2,
        (FORMAT_PCM, 24) => 3,
        (FORMAT_PCM, 32) => 4,
        (FORMAT_IEEE_FLOAT, 32) => 4,
        (FORMAT_PCM, bits) => {
            return Err(Error::UnsupportedEncoding(format!(
                "{bits}-bit PCM; supported PCM depths are 16, 24, 32"
            )))
        }
        (FORMAT_IEEE_FLOAT, bits) => {
            return Err(Error::UnsupportedEncoding(format!(
                "{bits}-bit IEEE float; only 32-bit floats are supported"
            )))
        }
        (code, _) => {
            return Err(Error::UnsupportedEncoding(format!(
                "format code {code}; supported codes are 1 (PCM) and 3 (IEEE float)"
            )))
        }
    };

    let channels = fmt.channels as usize;
    let frame_bytes = bytes_per_sample * channels;
    let frames = data.len() / frame_bytes;
    let mut out: Vec<Vec<f32>> = vec![Vec::with_capacity(frames); channels];
    for frame in 0..frames {
        for (ch, samples) in out.iter_mut().enumerate() {
            let at = frame * frame_bytes + ch * bytes_per_sample;
            let bytes = &data[at..at + bytes_per_sample];
            let value = match (fmt.format, fmt.bits_per_sample) {
                (FORMAT_PCM, 16) => LittleEndian::read_i16(bytes) as f32 / 32768.0,
                (FORMAT_PCM, 24) => LittleEndian::read_i24(bytes) as f32 / 8_388_608.0,
                (FORMAT_PCM, 32) => (LittleEndian::read_i32(bytes) as f64 / 2_147_483_648.0) as f32,
                (FORMAT_IEEE_FLOAT, 32) => LittleEndian::read_f32(bytes),
                _ => unreachable!(),
            };
            samples.push(value);
        }
    }
    AudioBuffer::new(out, fmt.sample_rate)
}

/// Encodes a buffer as a WAV file at the requested depth.
///
/// Integer depths saturate out-of-range samples to the closest code and report
/// a `ClippingDetected` warning with the number of affected samples; the
/// round-trip error through `read_wav` is at most one LSB of the chosen depth.
/// `Float32` stores samples bit-exactly.
pub fn write_wav(
    buffer: &AudioBuffer,
    path: impl AsRef<Path>,
    bit_depth: BitDepth,
) -> Result<Vec<Warning>> {
    let channels = buffer.channel_count() as u16;
    let frames = buffer.frames();
    let bits = bit_depth.bits();
    let bytes_per_sample = (bits / 8) as usize;
    let block_align = channels as usize * bytes_per_sample;
    let data_len = frames * block_align;
    let data_pad = data_len % 2;
    let fact_len = if bit_depth == BitDepth::Float32 { 12 } else { 0 };
    let riff_len = 4 + (8 + 16) + fact_len + (8 + data_len + data_pad);

    let mut clipped = 0usize;
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(b"RIFF")?;
    w.write_u32::<LittleEndian>(riff_len as u32)?;
    w.write_all(b"WAVE")?;
    w.write_all(b"fmt ")?;
    w.write_u32::<LittleEndian>(16)?;
    w.write_u16::<LittleEndian>(bit_depth.format_code())?;
    w.write_u16::<LittleEndian>(channels)?;
    w.write_u32::<LittleEndian>(buffer.sample_rate_hz())?;
    w.write_u32::<LittleEndian>(buffer.sample_rate_hz() * block_align as u32)?;
    w.write_u16::<LittleEndian>(block_align as u16)?;
    w.write_u16::<LittleEndian>(bits)?;
    if bit_depth == BitDepth::Float32 {
        w.write_all(b"fact")?;
        w.write_u32::<LittleEndian>(4)?;
        w.write_u32::<LittleEndian>(frames as u32)?;
    }
    w.write_all(b"data")?;
    w.write_u32::<LittleEndian>(data_len as u32)?;

    for frame in 0..frames {
        for ch in 0..buffer.channel_count() {
            let x = buffer.channel(ch)[frame];
            if x.abs() > 1.0 {
                clipped += 1;
            }
            match bit_depth {
                BitDepth::Int16 => {
                    let code = (f64::from(x) * 32768.0).round().clamp(-32768.0, 32767.0);
                    w.write_i16::<LittleEndian>(code as i16)?;
                }
                BitDepth::Int24 => {
                    let code = (f64::from(x) * 8_388_608.0)
                        .round()
                        .clamp(-8_388_608.0, 8_388_607.0);
                    w.write_i24::<LittleEndian>(code as i32)?;
                }
                BitDepth::Float32 => {
                    w.write_f32::<LittleEndian>(x)?;
                }
            }
        }
    }
    if data_pad == 1 {
        w.write_u8(0)?;
    }
    w.flush()?;

    let mut warnings = Vec::new();
    if clipped > 0 {
        warnings.push(Warning::new(
            WarningKind::ClippingDetected,
            format!("{clipped} sample(s) outside [-1, 1] were saturated"),
        ));
    }
    Ok(warnings)
}
