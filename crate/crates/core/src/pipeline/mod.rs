//! Sweeps, library files, plots and image extraction.

pub mod image;
pub mod library;
pub mod svg;
pub mod sweep;

pub use image::{extract_centerline, GrayImage, ScanAxis, DEFAULT_THRESHOLD};
pub use library::{write_library, LibraryFormat, LIBRARY_HEADER};
pub use svg::{render_svg, LabeledCurve, SvgStyle};
pub use sweep::{run_sweep, run_sweep_with, LibraryRecord, SpecRef, SweepConfig, SweepGrid};
