"""Tensor with reverse-mode automatic differentiation.

Each operation returns a new `Tensor` that remembers its parents and a backward
function mapping the upstream gradient to one gradient per parent. `backward()`
walks the graph in reverse topological order and accumulates into `.grad`.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from spoofguard.errors import ShapeMismatchError

STORAGE_DTYPE = np.float32
ACCUMULATE_DTYPE = np.float64

BackwardFn = Callable[[np.ndarray], Sequence[np.ndarray | None]]


class Tensor:
    """n-dimensional array with an optional gradient slot."""

    __slots__ = ("_backward", "_parents", "data", "grad", "name", "requires_grad")

    def __init__(
        self,
        data: np.ndarray | float | Sequence,
        *,
        requires_grad: bool = False,
        name: str = "",
        dtype: type | None = None,
    ) -> None:
        """Wrap an array; float data keeps its precision unless `dtype` is given."""
        array = np.asarray(data)
        if dtype is not None:
            array = array.astype(dtype)
        elif not np.issubdtype(array.dtype, np.floating):
            array = array.astype(STORAGE_DTYPE)

        self.data = array
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad
        self.name = name
        self._parents: tuple[Tensor, ...] = ()
        self._backward: BackwardFn | None = None

    @classmethod
    def from_op(
        cls,
        data: np.ndarray,
        parents: Sequence[Tensor],
        backward: BackwardFn,
    ) -> Tensor:
        """Create the result of an operation, recording the graph edge if needed."""
        out = cls(data, dtype=data.dtype)
        if any(parent.requires_grad for parent in parents):
            out.requires_grad = True
            out._parents = tuple(parents)
            out._backward = backward
        return out

    @property
    def shape(self) -> tuple[int, ...]:
        """Dimension list."""
        return self.data.shape

    @property
    def dtype(self) -> np.dtype:
        """Element type of the stored data."""
        return self.data.dtype

    def zero_grad(self) -> None:
        """Drop the accumulated gradient."""
        self.grad = None

    def detach(self) -> Tensor:
        """Same data, no graph."""
        return Tensor(self.data, dtype=self.data.dtype)

    def backward(self, grad: np.ndarray | None = None) -> None:
        """Back-propagate from this tensor; a scalar defaults to d(self)/d(self) = 1."""
        if grad is None:
            if self.data.size != 1:
                message = f"backward() needs an explicit gradient for shape {self.shape}"
                raise ShapeMismatchError(message)
            grad = np.ones_like(self.data)
        elif grad.shape != self.shape:
            message = f"gradient shape {grad.shape} does not match tensor {self.shape}"
            raise ShapeMismatchError(message)

        order: list[Tensor] = []
        visited: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            stack.extend((parent, False) for parent in node._parents)

        self._accumulate(grad)
        for node in reversed(order):
            if node._backward is None or node.grad is None:
                continue
            parent_grads = node._backward(node.grad)
            for parent, parent_grad in zip(node._parents, parent_grads):
                if parent.requires_grad and parent_grad is not None:
                    parent._accumulate(parent_grad)

            # Interior gradients are not needed once propagated.
            node.grad = None if node._parents else node.grad

    def _accumulate(self, grad: np.ndarray) -> None:
        grad = np.asarray(grad, dtype=self.data.dtype)
        self.grad = grad.copy() if self.grad is None else self.grad + grad

    def __add__(self, other: Tensor) -> Tensor:
        """Elementwise sum of two same-shape tensors."""
        if self.shape != other.shape:
            message = f"cannot add shapes {self.shape} and {other.shape}"
            raise ShapeMismatchError(message)

        return Tensor.from_op(
            self.data + other.data,
            (self, other),
            lambda grad: (grad, grad),
        )

    def __repr__(self) -> str:
        """Short description with shape and dtype."""
        label = f" {self.name}" if self.name else ""
        return f"Tensor{label}(shape={self.shape}, dtype={self.data.dtype})"


def parameter(data: np.ndarray, name: str) -> Tensor:
    """A trainable leaf tensor."""
    return Tensor(data, requires_grad=True, name=name, dtype=np.asarray(data).dtype)
