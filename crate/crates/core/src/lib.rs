//! Lossy color coding for static point clouds.
//!
//! Geometry is side information: the encoder and decoder both see the point
//! positions and derive the same block structure from them. Only colors are
//! coded. See [`codec::encode`] and [`codec::decode`].

pub mod cloud;
pub mod codec;
pub mod color;
pub mod dct;
pub mod entropy;
pub mod error;
pub mod eval;
pub mod partition;
pub mod ply;
pub mod prediction;
pub mod quant_scan;
pub mod synthetic;
pub mod transform;

pub use cloud::{Point, PointCloud, YuvAttributes};
pub use codec::{decode, encode, DecodedCloud, EncodedFrame, EncoderConfig};
pub use error::{Error, ErrorKind};
