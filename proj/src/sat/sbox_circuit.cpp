#include "snapattack/sat/sbox_circuit.hpp"

#include <iterator>

namespace snapattack::sat {

namespace {

// Straight-line program for the AES Sbox: 27 linear top gates, a shared
// nonlinear middle section and a linear bottom layer. Wires 0-7 are the
// input bits U0..U7 (U0 = most significant), gate k drives wire 8 + k.
constexpr SboxGate kGates[] = {
    {GateOp::Xor, 0, 3}, // T1 = U0 + U3
    {GateOp::Xor, 0, 5}, // T2 = U0 + U5
    {GateOp::Xor, 0, 6}, // T3 = U0 + U6
    {GateOp::Xor, 3, 5}, // T4 = U3 + U5
    {GateOp::Xor, 4, 6}, // T5 = U4 + U6
    {GateOp::Xor, 8, 12}, // T6 = T1 + T5
    {GateOp::Xor, 1, 2}, // T7 = U1 + U2
    {GateOp::Xor, 7, 13}, // T8 = U7 + T6
    {GateOp::Xor, 7, 14}, // T9 = U7 + T7
    {GateOp::Xor, 13, 14}, // T10 = T6 + T7
    {GateOp::Xor, 1, 5}, // T11 = U1 + U5
    {GateOp::Xor, 2, 5}, // T12 = U2 + U5
    {GateOp::Xor, 10, 11}, // T13 = T3 + T4
    {GateOp::Xor, 13, 18}, // T14 = T6 + T11
    {GateOp::Xor, 12, 18}, // T15 = T5 + T11
    {GateOp::Xor, 12, 19}, // T16 = T5 + T12
    {GateOp::Xor, 16, 23}, // T17 = T9 + T16
    {GateOp::Xor, 3, 7}, // T18 = U3 + U7
    {GateOp::Xor, 14, 25}, // T19 = T7 + T18
    {GateOp::Xor, 8, 26}, // T20 = T1 + T19
    {GateOp::Xor, 6, 7}, // T21 = U6 + U7
    {GateOp::Xor, 14, 28}, // T22 = T7 + T21
    {GateOp::Xor, 9, 29}, // T23 = T2 + T22
    {GateOp::Xor, 9, 17}, // T24 = T2 + T10
    {GateOp::Xor, 27, 24}, // T25 = T20 + T17
    {GateOp::Xor, 10, 23}, // T26 = T3 + T16
    {GateOp::Xor, 8, 19}, // T27 = T1 + T12
    {GateOp::And, 20, 13}, // M1 = T13 x T6
    {GateOp::And, 30, 15}, // M2 = T23 x T8
    {GateOp::Xor, 21, 35}, // M3 = T14 + M1
    {GateOp::And, 26, 7}, // M4 = T19 x U7
    {GateOp::Xor, 38, 35}, // M5 = M4 + M1
    {GateOp::And, 10, 23}, // M6 = T3 x T16
    {GateOp::And, 29, 16}, // M7 = T22 x T9
    {GateOp::Xor, 33, 40}, // M8 = T26 + M6
    {GateOp::And, 27, 24}, // M9 = T20 x T17
    {GateOp::Xor, 43, 40}, // M10 = M9 + M6
    {GateOp::And, 8, 22}, // M11 = T1 x T15
    {GateOp::And, 11, 34}, // M12 = T4 x T27
    {GateOp::Xor, 46, 45}, // M13 = M12 + M11
    {GateOp::And, 9, 17}, // M14 = T2 x T10
    {GateOp::Xor, 48, 45}, // M15 = M14 + M11
    {GateOp::Xor, 37, 36}, // M16 = M3 + M2
    {GateOp::Xor, 39, 31}, // M17 = M5 + T24
    {GateOp::Xor, 42, 41}, // M18 = M8 + M7
    {GateOp::Xor, 44, 49}, // M19 = M10 + M15
    {GateOp::Xor, 50, 47}, // M20 = M16 + M13
    {GateOp::Xor, 51, 49}, // M21 = M17 + M15
    {GateOp::Xor, 52, 47}, // M22 = M18 + M13
    {GateOp::Xor, 53, 32}, // M23 = M19 + T25
    {GateOp::Xor, 56, 57}, // M24 = M22 + M23
    {GateOp::And, 56, 54}, // M25 = M22 x M20
    {GateOp::Xor, 55, 59}, // M26 = M21 + M25
    {GateOp::Xor, 54, 55}, // M27 = M20 + M21
    {GateOp::Xor, 57, 59}, // M28 = M23 + M25
    {GateOp::And, 62, 61}, // M29 = M28 x M27
    {GateOp::And, 60, 58}, // M30 = M26 x M24
    {GateOp::And, 54, 57}, // M31 = M20 x M23
    {GateOp::And, 61, 65}, // M32 = M27 x M31
    {GateOp::Xor, 61, 59}, // M33 = M27 + M25
    {GateOp::And, 55, 56}, // M34 = M21 x M22
    {GateOp::And, 58, 68}, // M35 = M24 x M34
    {GateOp::Xor, 58, 59}, // M36 = M24 + M25
    {GateOp::Xor, 55, 63}, // M37 = M21 + M29
    {GateOp::Xor, 66, 67}, // M38 = M32 + M33
    {GateOp::Xor, 57, 64}, // M39 = M23 + M30
    {GateOp::Xor, 69, 70}, // M40 = M35 + M36
    {GateOp::Xor, 72, 74}, // M41 = M38 + M40
    {GateOp::Xor, 71, 73}, // M42 = M37 + M39
    {GateOp::Xor, 71, 72}, // M43 = M37 + M38
    {GateOp::Xor, 73, 74}, // M44 = M39 + M40
    {GateOp::Xor, 76, 75}, // M45 = M42 + M41
    {GateOp::And, 78, 13}, // M46 = M44 x T6
    {GateOp::And, 74, 15}, // M47 = M40 x T8
    {GateOp::And, 73, 7}, // M48 = M39 x U7
    {GateOp::And, 77, 23}, // M49 = M43 x T16
    {GateOp::And, 72, 16}, // M50 = M38 x T9
    {GateOp::And, 71, 24}, // M51 = M37 x T17
    {GateOp::And, 76, 22}, // M52 = M42 x T15
    {GateOp::And, 79, 34}, // M53 = M45 x T27
    {GateOp::And, 75, 17}, // M54 = M41 x T10
    {GateOp::And, 78, 20}, // M55 = M44 x T13
    {GateOp::And, 74, 30}, // M56 = M40 x T23
    {GateOp::And, 73, 26}, // M57 = M39 x T19
    {GateOp::And, 77, 10}, // M58 = M43 x T3
    {GateOp::And, 72, 29}, // M59 = M38 x T22
    {GateOp::And, 71, 27}, // M60 = M37 x T20
    {GateOp::And, 76, 8}, // M61 = M42 x T1
    {GateOp::And, 79, 11}, // M62 = M45 x T4
    {GateOp::And, 75, 9}, // M63 = M41 x T2
    {GateOp::Xor, 95, 96}, // L0 = M61 + M62
    {GateOp::Xor, 84, 90}, // L1 = M50 + M56
    {GateOp::Xor, 80, 82}, // L2 = M46 + M48
    {GateOp::Xor, 81, 89}, // L3 = M47 + M55
    {GateOp::Xor, 88, 92}, // L4 = M54 + M58
    {GateOp::Xor, 83, 95}, // L5 = M49 + M61
    {GateOp::Xor, 96, 103}, // L6 = M62 + L5
    {GateOp::Xor, 80, 101}, // L7 = M46 + L3
    {GateOp::Xor, 85, 93}, // L8 = M51 + M59
    {GateOp::Xor, 86, 87}, // L9 = M52 + M53
    {GateOp::Xor, 87, 102}, // L10 = M53 + L4
    {GateOp::Xor, 94, 100}, // L11 = M60 + L2
    {GateOp::Xor, 82, 85}, // L12 = M48 + M51
    {GateOp::Xor, 84, 98}, // L13 = M50 + L0
    {GateOp::Xor, 86, 95}, // L14 = M52 + M61
    {GateOp::Xor, 89, 99}, // L15 = M55 + L1
    {GateOp::Xor, 90, 98}, // L16 = M56 + L0
    {GateOp::Xor, 91, 99}, // L17 = M57 + L1
    {GateOp::Xor, 92, 106}, // L18 = M58 + L8
    {GateOp::Xor, 97, 102}, // L19 = M63 + L4
    {GateOp::Xor, 98, 99}, // L20 = L0 + L1
    {GateOp::Xor, 99, 105}, // L21 = L1 + L7
    {GateOp::Xor, 101, 110}, // L22 = L3 + L12
    {GateOp::Xor, 116, 100}, // L23 = L18 + L2
    {GateOp::Xor, 113, 107}, // L24 = L15 + L9
    {GateOp::Xor, 104, 108}, // L25 = L6 + L10
    {GateOp::Xor, 105, 107}, // L26 = L7 + L9
    {GateOp::Xor, 106, 108}, // L27 = L8 + L10
    {GateOp::Xor, 109, 112}, // L28 = L11 + L14
    {GateOp::Xor, 109, 115}, // L29 = L11 + L17
    {GateOp::Xor, 104, 122}, // S0 = L6 + L24
    {GateOp::Xnor, 114, 124}, // S1 = L16 # L26
    {GateOp::Xnor, 117, 126}, // S2 = L19 # L28
    {GateOp::Xor, 104, 119}, // S3 = L6 + L21
    {GateOp::Xor, 118, 120}, // S4 = L20 + L22
    {GateOp::Xor, 123, 127}, // S5 = L25 + L29
    {GateOp::Xnor, 111, 125}, // S6 = L13 # L27
    {GateOp::Xnor, 104, 121}, // S7 = L6 # L23
};

constexpr int kOutputs[8] = {128, 129, 130, 131, 132, 133, 134, 135};

} // namespace

std::span<const SboxGate> sbox_gates() { return kGates; }

int sbox_output_wire(int bit_from_msb) { return kOutputs[bit_from_msb]; }

std::uint8_t sbox_circuit_eval(std::uint8_t x)
{
    std::uint8_t wire[8 + std::size(kGates)];
    for (int i = 0; i < 8; ++i)
        wire[i] = (x >> (7 - i)) & 1;
    for (std::size_t k = 0; k < std::size(kGates); ++k) {
        const SboxGate& g = kGates[k];
        const std::uint8_t a = wire[g.a], b = wire[g.b];
        switch (g.op) {
        case GateOp::Xor: wire[8 + k] = a ^ b; break;
        case GateOp::Xnor: wire[8 + k] = a ^ b ^ 1; break;
        case GateOp::And: wire[8 + k] = a & b; break;
        }
    }
    std::uint8_t y = 0;
    for (int i = 0; i < 8; ++i)
        y = static_cast<std::uint8_t>(y | (wire[kOutputs[i]] << (7 - i)));
    return y;
}

} // namespace snapattack::sat
