"""Register-level simulated hardware: buses, devices and acquisition chains."""

from stratobc.halsim.i2c import I2cBus, NackError, TransactionLog
from stratobc.halsim.rig import (
    AcquisitionError,
    MuxRangeError,
    SensorSample,
    SimulatedRig,
    TestBenchFixture,
    TopologyAudit,
)
from stratobc.halsim.uart import UartError, UartPort

__all__ = [
    "AcquisitionError",
    "I2cBus",
    "MuxRangeError",
    "NackError",
    "SensorSample",
    "SimulatedRig",
    "TestBenchFixture",
    "TopologyAudit",
    "TransactionLog",
    "UartError",
    "UartPort",
]
