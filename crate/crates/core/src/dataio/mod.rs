//! Dataset and file I/O: CIFAR-10 binary batches, portable pixmaps (PNG with
//! the `png` feature), and the encoded-model container.

mod cifar;
mod codec;
mod pnm;

pub use cifar::{encode_cifar_records, load_cifar10_test, parse_cifar_records, CifarRecord};
pub use codec::{decode_model, encode_model, load_model, save_model, FORMAT_VERSION, MAGIC};
pub use pnm::{decode_ppm, encode_ppm, read_image, write_image};
