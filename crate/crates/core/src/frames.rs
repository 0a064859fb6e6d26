//! Reading and writing frame directories (`frame_0001.pgm`, ...).

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::imaging::Frame;

/// Decodes a binary PGM (P5) or PPM (P6) file; color is converted to luma.
pub fn read_frame(path: &Path) -> Result<Frame> {
    let img = image::open(path).map_err(|e| Error::Image {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let luma = img.into_luma8();
    let (w, h) = luma.dimensions();
    Frame::new(w as usize, h as usize, luma.into_raw())
}

/// Writes `frame` as a binary P5 PGM.
pub fn write_pgm(path: &Path, frame: &Frame) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    write!(out, "P5\n{} {}\n255\n", frame.width(), frame.height())?;
    out.write_all(frame.pixels())?;
    out.flush()?;
    Ok(())
}

/// Frame files of a video directory, in lexical order.
pub fn frame_paths(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(Error::at(dir))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            let name = p.file_name().and_then(|n| n.to_str()).unwrap_or("");
            let ext = p.extension().and_then(|e| e.to_str()).unwrap_or("");
            name.starts_with("frame_") && matches!(ext, "ppm" | "pgm")
        })
        .collect();
    paths.sort();
    Ok(paths)
}

pub fn read_video_dir(dir: &Path) -> Result<Vec<Frame>> {
    let paths = frame_paths(dir)?;
    if paths.is_empty() {
        return Err(Error::Image {
            path: dir.to_path_buf(),
            message: "directory contains no frame_*.ppm or frame_*.pgm files".into(),
        });
    }
    paths.iter().map(|p| read_frame(p)).collect()
}
