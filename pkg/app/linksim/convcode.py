import numpy as np

from ..utils import InvalidArgument, require

STANDARD_GENERATORS = (0o133, 0o171)


def _parity(x: np.ndarray) -> np.ndarray:
    x = x.copy()
    out = np.zeros_like(x)
    while np.any(x):
        out ^= x & 1
        x >>= 1
    return out


class ConvolutionalCode:
    """
    Rate-1/n feedforward convolutional code with zero-tail termination.

    The shift register holds the current input at its most significant bit, so a generator's
    leading octal digit taps the newest bit. Soft decoding takes LLRs log P(0)/P(1).
    """

    def __init__(self, constraint_length: int = 7, generators=STANDARD_GENERATORS):
        require(constraint_length >= 2, "constraint length must be at least 2")
        self.constraint_length = constraint_length
        self.memory = constraint_length - 1
        self.generators = tuple(int(g) for g in generators)
        require(
            all(0 < g < (1 << constraint_length) for g in self.generators),
            f"generators must fit in {constraint_length} bits",
        )
        self.n_states = 1 << self.memory
        self.n_out = len(self.generators)

        states = np.arange(self.n_states)
        # next_state[s, b], outputs[s, b, j]
        self.next_state = np.empty((self.n_states, 2), dtype=np.int64)
        self.outputs = np.empty((self.n_states, 2, self.n_out), dtype=np.uint8)
        for b in (0, 1):
            register = (b << self.memory) | states
            self.next_state[:, b] = register >> 1
            for j, g in enumerate(self.generators):
                self.outputs[:, b, j] = _parity(register & g)

        # each state is entered from two predecessors, both with the same input bit
        self.prev_state = np.empty((self.n_states, 2), dtype=np.int64)
        self.prev_bit = states >> (self.memory - 1)
        for ns in range(self.n_states):
            low = (ns << 1) & (self.n_states - 1)
            self.prev_state[ns] = (low, low | 1)
        self.prev_outputs = self.outputs[self.prev_state, self.prev_bit[:, None]]

    @property
    def rate(self) -> float:
        return 1.0 / self.n_out

    def encoded_length(self, n_info: int) -> int:
        return (n_info + self.memory) * self.n_out

    def encode(self, bits) -> np.ndarray:
        """(..., L) info bits -> (..., n (L + memory)) coded bits, tail zeros appended."""
        b = np.asarray(bits, dtype=np.int64)
        lead = b.shape[:-1]
        b = b.reshape(-1, b.shape[-1])
        b = np.concatenate((b, np.zeros((b.shape[0], self.memory), dtype=np.int64)), axis=1)

        state = np.zeros(b.shape[0], dtype=np.int64)
        out = np.empty((b.shape[0], b.shape[1], self.n_out), dtype=np.uint8)
        for t in range(b.shape[1]):
            out[:, t] = self.outputs[state, b[:, t]]
            state = self.next_state[state, b[:, t]]
        return out.reshape(lead + (-1,))

    def decode(self, llrs) -> np.ndarray:
        """Soft-input Viterbi over a batch: (..., n (L + memory)) LLRs -> (..., L) bits."""
        llr = np.asarray(llrs, dtype=float)
        if llr.shape[-1] % self.n_out:
            raise InvalidArgument(f"LLR count must be a multiple of {self.n_out}")
        lead = llr.shape[:-1]
        steps = llr.shape[-1] // self.n_out
        require(steps > self.memory, "codeword shorter than the termination tail")
        llr = llr.reshape(-1, steps, self.n_out)
        batch = llr.shape[0]

        signs = 1.0 - 2.0 * self.prev_outputs.astype(float)  # (S, 2, n)
        metric = np.full((batch, self.n_states), -np.inf)
        metric[:, 0] = 0.0
        decisions = np.empty((batch, steps, self.n_states), dtype=np.uint8)

        for t in range(steps):
            branch = np.einsum("bj,spj->bsp", llr[:, t], signs)
            candidates = metric[:, self.prev_state] + branch
            choice = np.argmax(candidates, axis=2)
            decisions[:, t] = choice
            metric = np.take_along_axis(candidates, choice[..., None], axis=2)[..., 0]

        state = np.zeros(batch, dtype=np.int64)
        bits = np.empty((batch, steps), dtype=np.uint8)
        rows = np.arange(batch)
        for t in range(steps - 1, -1, -1):
            bits[:, t] = self.prev_bit[state]
            state = self.prev_state[state, decisions[rows, t, state]]
        return bits[:, : steps - self.memory].reshape(lead + (-1,))


class BlockInterleaver:
    """Written row by row into a rows x cols array, read out column by column."""

    def __init__(self, rows: int, cols: int):
        require(rows >= 1 and cols >= 1, "interleaver dimensions must be positive")
        self.rows = rows
        self.cols = cols

    @property
    def size(self) -> int:
        return self.rows * self.cols

    def _check(self, x: np.ndarray):
        if x.shape[-1] != self.size:
            raise InvalidArgument(
                f"interleaver holds {self.size} entries ({self.rows}x{self.cols}), got {x.shape[-1]}"
            )

    def interleave(self, x) -> np.ndarray:
        x = np.asarray(x)
        self._check(x)
        lead = x.shape[:-1]
        return np.swapaxes(x.reshape(lead + (self.rows, self.cols)), -1, -2).reshape(lead + (-1,))

    def deinterleave(self, x) -> np.ndarray:
        x = np.asarray(x)
        self._check(x)
        lead = x.shape[:-1]
        return np.swapaxes(x.reshape(lead + (self.cols, self.rows)), -1, -2).reshape(lead + (-1,))
