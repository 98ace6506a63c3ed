//! C ABI surface; implemented after the core library.
