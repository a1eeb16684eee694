"""Anonymous capped-use testing vouchers and citizen-driven tracing.

The package has three layers:

* code and record primitives (`codes`, `storage`, `vouchers`, `booking`)
* a small HTTP+JSON service tying them together (`service`)
* an agent-based simulator that scores how much of a ground-truth
  infection forest voucher tracing detects (`sim`)

Everything persisted is anonymous by construction: no record type has a
field for a person's identity, and erased records are indistinguishable
from records that never existed.
"""

__version__ = "0.1.0"
