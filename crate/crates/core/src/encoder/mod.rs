//! Image encoder stand-in and projection-based local feature extraction.
//!
//! A three-layer strided convolution network turns a single-channel depth
//! image into a stack of feature maps at 1/2, 1/4 and 1/8 resolution. The
//! global feature is the spatial mean of the last map; local features of a
//! 3D point are the bilinearly sampled values of every map at the point's
//! projection, concatenated in layer order.

mod conv;
mod image;
mod sample;

pub use conv::{encode_image, encode_image_backward, ConvLayer, EncoderConfig, EncoderGrads, EncoderParams};
pub use image::Image;
pub use sample::{
    bilinear_sample, interpolate_features, local_features, local_features_backward, pool_multiview, FeatureMap,
    FeatureMapStack,
};
