pub mod ring;
pub mod preorder;
pub mod algebra;
pub mod maps;
pub mod verify;
pub mod decompose;
pub mod properness;
