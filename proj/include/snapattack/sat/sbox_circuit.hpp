#pragma once

#include <cstdint>
#include <span>

namespace snapattack::sat {

enum class GateOp : std::uint8_t { Xor, Xnor, And };

struct SboxGate {
    GateOp op;
    int a;
    int b;
};

// Gate list of a combinational AES Sbox. Wire numbering: inputs 0-7
// (most significant bit first), gate k drives wire 8 + k.
std::span<const SboxGate> sbox_gates();
int sbox_output_wire(int bit_from_msb);

// Evaluates the gate list directly; equals aes::sbox for every input.
std::uint8_t sbox_circuit_eval(std::uint8_t x);

} // namespace snapattack::sat
