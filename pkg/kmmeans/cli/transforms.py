"""
Feature Transforms

Per-column log10 or inverse hyperbolic sine h(u; theta) = asinh(theta u) / theta with
h(u; 0) = u, optionally followed by centering and scaling every column by the mean and
sample standard deviation of its observed cells. Only observed cells are touched and
the fitted parameters are kept so centers can be mapped back.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field

from kmmeans.data_model import MaskedDataset
from kmmeans.errors import ConfigurationError, NonPositiveForLog, ZeroVariance


class ColumnTransform(BaseModel):
    """Transform of one column"""

    op: str = Field(default="none", pattern="^(none|log10|asinh)$")
    theta: float = Field(default=0.0, ge=0, description="asinh scale; 0 is the identity")


class TransformSpec(BaseModel):
    """Column transforms keyed by column name or 1-based index, then center/scale"""

    columns: Dict[str, ColumnTransform] = Field(default_factory=dict)
    center_scale: bool = Field(default=False)


def parse_transform(text: str) -> Tuple[str, ColumnTransform]:
    """Parse 'column=log10', 'column=asinh:10' or 'column=none'."""
    if "=" not in text:
        raise ConfigurationError(f"Transform {text!r} must look like COLUMN=log10 or COLUMN=asinh:THETA")
    column, op = (part.strip() for part in text.split("=", 1))
    if op.startswith("asinh"):
        _, _, theta = op.partition(":")
        if not theta:
            raise ConfigurationError(f"asinh needs a theta, e.g. {column}=asinh:10")
        return column, ColumnTransform(op="asinh", theta=float(theta))
    return column, ColumnTransform(op=op)


def build_transform_spec(items: Sequence[str], center_scale: bool) -> TransformSpec:
    return TransformSpec(columns=dict(parse_transform(item) for item in items), center_scale=center_scale)


def asinh_transform(u: np.ndarray, theta: float) -> np.ndarray:
    return u if theta == 0 else np.arcsinh(theta * u) / theta


def asinh_inverse(v: np.ndarray, theta: float) -> np.ndarray:
    return v if theta == 0 else np.sinh(theta * v) / theta


def _resolve_column(key: str, columns: List[str]) -> int:
    if key in columns:
        return columns.index(key)
    if key.isdigit() and 1 <= int(key) <= len(columns):
        return int(key) - 1
    raise ConfigurationError(f"Unknown column {key!r}")


@dataclass
class FittedTransforms:
    """Parameters needed to reproduce or invert apply_transforms"""

    columns: List[str]
    ops: Dict[int, ColumnTransform] = field(default_factory=dict)
    means: Optional[np.ndarray] = None
    sds: Optional[np.ndarray] = None

    def inverse(self, values: np.ndarray) -> np.ndarray:
        """Map transformed-scale rows (e.g. centers) back to the original scale."""
        out = np.array(values, dtype=np.float64)
        if self.means is not None and self.sds is not None:
            out = out * self.sds + self.means
        for j, transform in self.ops.items():
            if transform.op == "log10":
                out[:, j] = 10.0 ** out[:, j]
            elif transform.op == "asinh":
                out[:, j] = asinh_inverse(out[:, j], transform.theta)
        return out

    def to_dict(self) -> Dict[str, Any]:
        return {
            "columns": {
                self.columns[j]: {"op": t.op, "theta": t.theta} for j, t in sorted(self.ops.items())
            },
            "center": None if self.means is None else self.means.tolist(),
            "scale": None if self.sds is None else self.sds.tolist(),
        }


def apply_transforms(
    ds: MaskedDataset, spec: TransformSpec, columns: Optional[List[str]] = None
) -> Tuple[MaskedDataset, FittedTransforms]:
    """Transform observed cells column by column, then center and scale."""
    columns = list(columns or ds.column_names or [f"x{j + 1}" for j in range(ds.p)])
    values = ds.filled.copy()
    fitted = FittedTransforms(columns)

    for key, transform in spec.columns.items():
        j = _resolve_column(key, columns)
        observed = ds.mask[:, j]
        if transform.op == "log10":
            if np.any(values[observed, j] <= 0):
                raise NonPositiveForLog(columns[j])
            values[observed, j] = np.log10(values[observed, j])
        elif transform.op == "asinh":
            values[observed, j] = asinh_transform(values[observed, j], transform.theta)
        if transform.op != "none":
            fitted.ops[j] = transform

    if spec.center_scale:
        means = np.zeros(ds.p)
        sds = np.ones(ds.p)
        for j in range(ds.p):
            observed = values[ds.mask[:, j], j]
            sd = observed.std(ddof=1) if observed.size > 1 else 0.0
            if not sd > 0:
                raise ZeroVariance(columns[j])
            means[j] = observed.mean()
            sds[j] = sd
        values = np.where(ds.mask, (values - means) / sds, 0.0)
        fitted.means, fitted.sds = means, sds

    return MaskedDataset(values, ds.mask, columns), fitted
