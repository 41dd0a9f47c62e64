//! Filtered cell complexes, boundary-matrix reduction over Z/2 and barcodes.

mod barcode;
mod complex;
mod reduce;

pub(crate) use barcode::lifespan_entropy;
pub use barcode::{barcode_entropy, Bar, Barcode, Barcodes};
pub use complex::{FilteredComplex, FilteredComplexBuilder};
pub use reduce::compute_persistence;
