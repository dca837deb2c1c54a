//! Image ingestion and model persistence.

mod image;
mod model_file;

pub use image::{
    load_image, parse_csv, parse_image, parse_pgm, to_feature_vector, write_pgm, FeatureVector,
    ImageReadOptions, PgmEncoding, RawImage, DEFAULT_CSV_MAX_VALUE,
};
pub use model_file::{
    decode_f64, encode_f64, load_model, load_model_file, model_from_str, model_to_string,
    save_model, save_model_file, ModelFile, FORMAT_TAG, FORMAT_VERSION,
};
