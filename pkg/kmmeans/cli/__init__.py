from kmmeans.cli.cli import app
from kmmeans.cli.csv_io import CsvTable, read_csv, read_labels, write_assignments, write_csv, write_matrix
from kmmeans.cli.transforms import (
    ColumnTransform,
    FittedTransforms,
    TransformSpec,
    apply_transforms,
    asinh_inverse,
    asinh_transform,
    build_transform_spec,
    parse_transform,
)

__all__ = [
    "ColumnTransform",
    "CsvTable",
    "FittedTransforms",
    "TransformSpec",
    "app",
    "apply_transforms",
    "asinh_inverse",
    "asinh_transform",
    "build_transform_spec",
    "parse_transform",
    "read_csv",
    "read_labels",
    "write_assignments",
    "write_csv",
    "write_matrix",
]
