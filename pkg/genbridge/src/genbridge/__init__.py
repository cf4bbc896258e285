"""Reference external generator process for the specevo wire protocol.

Mirrors the in-process analytic Wiener-flow generator and its built-in
rewards in an independent implementation (scipy FFTs, float32 payloads
promoted to float64), so cross-process conformance of the protocol can be
tested end to end. Also serves as the template for adapters that wrap
real generation pipelines.
"""

__version__ = "0.1.0"
