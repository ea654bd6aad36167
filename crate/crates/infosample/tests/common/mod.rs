#![allow(dead_code)]

use std::path::Path;
use std::process::{Command, Output};

use infosample_core::Raster;

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_infosample"))
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("failed to start infosample")
}

pub fn code(out: &Output) -> i32 {
    out.status.code().expect("terminated by signal")
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Deterministic textured image: gradients, a hard edge and xorshift noise.
pub fn textured(width: usize, height: usize, channels: usize, seed: u64) -> Raster {
    let mut x = seed | 1;
    Raster::from_fn(width, height, channels, |r, c, ch| {
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        let edge = if c > width / 2 { 90 } else { 0 };
        ((r * 2 + c + ch * 30 + edge) % 160 + (x % 64) as usize) as u8
    })
    .unwrap()
}

pub fn write_png(img: &Raster, path: &Path) {
    infosample::io::save_image(img, path).unwrap();
}
