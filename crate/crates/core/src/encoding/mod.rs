//! Classical-to-quantum encoders: the direct-sum representation used by the
//! classifier, plus FRQI and NEQR for comparison.

mod direct_sum;
mod frqi;
mod neqr;

pub use direct_sum::{
    block_dim_for, encode_component, encode_image, encode_pixel, representation_inner_product,
    DirectSumEncoding, EncodedComponent, EncodedImage, COMPONENT_RANGE_SLACK,
    IMAGE_RESIDUAL_COORDINATE,
};
pub use frqi::{encode_frqi, encode_frqi_intensities, FrqiImage};
pub use neqr::{encode_neqr, NeqrImage, MAX_BIT_DEPTH};
