pub use fyoung::*;
