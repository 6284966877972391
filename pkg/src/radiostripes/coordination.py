"""Message-passing view of a radio stripe.

Every AP is an agent that only sees its own channel state and the messages
delivered to it. Agent (m, i) waits for the side information of (m, i-1),
designs its strategy with :func:`radiostripes.inp.ap_step`, and forwards its
own side information and compressed signal to (m, i+1). The CP is node
(m, L). Hops take one time unit.
"""

from collections import deque
from dataclasses import dataclass, field

from .inp import ap_step

SIDE_INFO = "side_info"
COMPRESSED_SIGNAL = "compressed_signal"


def overhead_per_link(combiner, quantizer, K):
    """Real values of side information each fronthaul link carries per design.

    MMSE combining needs ``(G_hat, Sigma_e)`` from upstream; so do both
    quantizers (their covariance depends on ``G_hat`` and ``Sigma_n``). MRC
    combining alone needs nothing. The same message serves both needs, so
    the counts do not add.
    """
    need = 2 * K**2
    combining = need if combiner == "mmse" else 0
    compression = need if quantizer in ("opt", "naive") else 0
    return max(combining, compression)


@dataclass(frozen=True)
class Message:
    sender: tuple
    receiver: tuple
    kind: str
    payload_reals: int
    time: int
    payload: object = None


@dataclass
class StripeTrace:
    stripe: int
    messages: list = field(default_factory=list)

    @property
    def hops(self):
        return sum(1 for msg in self.messages if msg.kind == SIDE_INFO)

    @property
    def overhead_reals_total(self):
        return sum(msg.payload_reals for msg in self.messages if msg.kind == SIDE_INFO)

    def side_info_messages(self):
        return [msg for msg in self.messages if msg.kind == SIDE_INFO]


class ApAgent:
    """One AP. Holds local CSI only; upstream knowledge arrives by message."""

    def __init__(self, index, state, Sigma_x, C_F, combiner, quantizer, hybrid, rng):
        self.index = index
        self._H_hat = state.H_hat
        self._Sigma_w = state.Sigma_w
        self._Sigma_x = Sigma_x
        self._C_F = C_F
        self._combiner = combiner
        self._quantizer = quantizer
        self._hybrid = hybrid
        self._rng = rng
        self.result = None

    def on_message(self, msg, now):
        """Design on receipt of upstream side info (``msg`` is None at the head)."""
        prev = None if msg is None else msg.payload
        self.result = ap_step(self._H_hat, self._Sigma_w, prev, self._Sigma_x, self._C_F,
                              self._combiner, self._quantizer, self._hybrid, self._rng,
                              index=self.index)
        m, i = self.index
        K = self._Sigma_x.shape[0]
        si = Message(self.index, (m, i + 1), SIDE_INFO,
                     overhead_per_link(self._combiner, self._quantizer, K), now,
                     self.result.side_info_out)
        sig = Message(self.index, (m, i + 1), COMPRESSED_SIGNAL, 2 * K, now)
        return [si, sig]


def run_protocol(stripe_states, Sigma_x, C_F, combiner="mmse", quantizer="opt", hybrid="off",
                 rng=None, stripe=0):
    """Run one stripe as communicating agents.

    Returns
    -------
    results : list of ApInpResult
        Identical to :func:`radiostripes.inp.run_stripe` on the same input.
    trace : StripeTrace
    """
    L = len(stripe_states)
    agents = [ApAgent((stripe, i), st, Sigma_x, C_F, combiner, quantizer, hybrid, rng)
              for i, st in enumerate(stripe_states)]
    trace = StripeTrace(stripe=stripe)
    queue = deque([(1, None, 0)])  # (time, message, receiving agent)
    while queue:
        now, msg, target = queue.popleft()
        out = agents[target].on_message(msg, now)
        trace.messages.extend(out)
        for m in out:
            if m.kind == SIDE_INFO and target + 1 < L:
                queue.append((now + 1, m, target + 1))
    return [a.result for a in agents], trace


def overhead_report(traces):
    """Per-scheme signaling table from protocol traces.

    Parameters
    ----------
    traces : dict
        Scheme label to the list of :class:`StripeTrace` of one run.

    Returns
    -------
    list of dict
        One row per scheme with ``per_link``, ``links`` and ``total`` real
        values of side information.
    """
    rows = []
    for scheme, stripe_traces in traces.items():
        si = [msg for t in stripe_traces for msg in t.side_info_messages()]
        per_link = {msg.payload_reals for msg in si}
        rows.append({
            "scheme": scheme,
            "per_link": per_link.pop() if len(per_link) == 1 else None,
            "links": len(si),
            "total": sum(msg.payload_reals for msg in si),
        })
    return rows
