pub use gwm;
