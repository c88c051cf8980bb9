//! Minimal RIFF/WAVE reader: PCM 16/24/32-bit and IEEE float 32/64-bit,
//! any channel count (channels are averaged to mono).

use std::path::Path;

use lipsyn_core::speech::Waveform;

use crate::{CliError, CliResult};

fn u16_at(data: &[u8], pos: usize) -> u16 {
    u16::from_le_bytes([data[pos], data[pos + 1]])
}

fn u32_at(data: &[u8], pos: usize) -> u32 {
    u32::from_le_bytes([data[pos], data[pos + 1], data[pos + 2], data[pos + 3]])
}

/// Read a WAV file into a mono waveform in [-1, 1].
pub fn load_wav(path: &Path) -> CliResult<Waveform> {
    let data = std::fs::read(path)?;
    let bad = |msg: &str| CliError::data(format!("{}: {msg}", path.display()));
    if data.len() < 44 || &data[0..4] != b"RIFF" || &data[8..12] != b"WAVE" {
        return Err(bad("not a RIFF/WAVE file"));
    }

    let mut pos = 12;
    let mut format_tag = 0u16;
    let mut channels = 0u16;
    let mut sample_rate = 0u32;
    let mut bits = 0u16;
    let mut samples: Option<Vec<f64>> = None;

    while pos + 8 <= data.len() {
        let id = &data[pos..pos + 4];
        let size = u32_at(&data, pos + 4) as usize;
        let body = pos + 8;
        if body + size > data.len() {
            return Err(bad("truncated chunk"));
        }
        match id {
            b"fmt " => {
                if size < 16 {
                    return Err(bad("fmt chunk too small"));
                }
                format_tag = u16_at(&data, body);
                channels = u16_at(&data, body + 2);
                sample_rate = u32_at(&data, body + 4);
                bits = u16_at(&data, body + 14);
                // WAVE_FORMAT_EXTENSIBLE carries the real tag in the GUID.
                if format_tag == 0xFFFE && size >= 40 {
                    format_tag = u16_at(&data, body + 24);
                }
            }
            b"data" => {
                if channels == 0 || sample_rate == 0 {
                    return Err(bad("data chunk before fmt chunk"));
                }
                let bytes_per_sample = (bits / 8) as usize;
                if bytes_per_sample == 0 {
                    return Err(bad("zero sample width"));
                }
                let frame_bytes = bytes_per_sample * channels as usize;
                let n_frames = size / frame_bytes;
                let mut mono = Vec::with_capacity(n_frames);
                for f in 0..n_frames {
                    let mut acc = 0.0;
                    for c in 0..channels as usize {
                        let at = body + f * frame_bytes + c * bytes_per_sample;
                        let v = match (format_tag, bits) {
                            (1, 16) => {
                                i16::from_le_bytes([data[at], data[at + 1]]) as f64 / 32768.0
                            }
                            (1, 24) => {
                                let raw = ((data[at + 2] as i32) << 16
                                    | (data[at + 1] as i32) << 8
                                    | data[at] as i32)
                                    << 8
                                    >> 8;
                                raw as f64 / 8_388_608.0
                            }
                            (1, 32) => {
                                i32::from_le_bytes([
                                    data[at],
                                    data[at + 1],
                                    data[at + 2],
                                    data[at + 3],
                                ]) as f64
                                    / 2_147_483_648.0
                            }
                            (3, 32) => f32::from_le_bytes([
                                data[at],
                                data[at + 1],
                                data[at + 2],
                                data[at + 3],
                            ]) as f64,
                            (3, 64) => f64::from_le_bytes([
                                data[at],
                                data[at + 1],
                                data[at + 2],
                                data[at + 3],
                                data[at + 4],
                                data[at + 5],
                                data[at + 6],
                                data[at + 7],
                            ]),
                            (tag, bits) => {
                                return Err(bad(&format!(
                                    "unsupported format tag {tag} at {bits} bits"
                                )))
                            }
                        };
                        acc += v;
                    }
                    mono.push((acc / channels as f64).clamp(-1.0, 1.0));
                }
                samples = Some(mono);
            }
            _ => {}
        }
        // Chunks are word-aligned.
        pos = body + size + (size & 1);
    }
    let samples = samples.ok_or_else(|| bad("no data chunk"))?;
    Ok(Waveform::new(samples, sample_rate)?)
}

/// Write a mono 16-bit PCM WAV (used by tests and fixtures).
pub fn save_wav_pcm16(path: &Path, samples: &[f64], sample_rate: u32) -> CliResult<()> {
    let n = samples.len();
    let data_size = 2 * n;
    let mut out = Vec::with_capacity(44 + data_size);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&((36 + data_size) as u32).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes()); // PCM
    out.extend_from_slice(&1u16.to_le_bytes()); // mono
    out.extend_from_slice(&sample_rate.to_le_bytes());
    out.extend_from_slice(&(sample_rate * 2).to_le_bytes());
    out.extend_from_slice(&2u16.to_le_bytes());
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&(data_size as u32).to_le_bytes());
    for &s in samples {
        let v = (s.clamp(-1.0, 1.0) * 32767.0).round() as i16;
        out.extend_from_slice(&v.to_le_bytes());
    }
    std::fs::write(path, out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pcm16_round_trip() {
        let dir = std::env::temp_dir().join(format!("lipsyn-wav-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("tone.wav");
        let samples: Vec<f64> = (0..1600)
            .map(|i| (2.0 * std::f64::consts::PI * 220.0 * i as f64 / 16000.0).sin() * 0.5)
            .collect();
        save_wav_pcm16(&path, &samples, 16000).unwrap();
        let w = load_wav(&path).unwrap();
        assert_eq!(w.sample_rate(), 16000);
        assert_eq!(w.samples().len(), 1600);
        for (a, b) in w.samples().iter().zip(samples.iter()) {
            assert!((a - b).abs() < 1.0 / 32000.0);
        }
    }

    #[test]
    fn rejects_non_wav() {
        let dir = std::env::temp_dir().join(format!("lipsyn-wav-bad-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("not.wav");
        std::fs::write(&path, b"hello world, definitely not audio").unwrap();
        assert!(load_wav(&path).is_err());
    }
}
