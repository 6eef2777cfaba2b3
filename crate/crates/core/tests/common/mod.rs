pub mod polygen;
