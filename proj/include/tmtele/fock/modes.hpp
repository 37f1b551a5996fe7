#pragma once

#include <cstdint>
#include <functional>
#include <string>

namespace tmtele::fock {

// Role of an optical mode in the register. Every optical channel carries an
// early and a late time bin.
enum class ModeRole : std::uint8_t {
    SignalEarly,
    SignalLate,
    IdlerEarly,
    IdlerLate,
    InputEarly,
    InputLate,
    AuxEarly,
    AuxLate,
    Ancilla,
};

struct ModeId {
    ModeRole role = ModeRole::Ancilla;
    std::uint8_t tag = 0;  // distinguishes ancillas and detector outputs

    friend bool operator==(const ModeId&, const ModeId&) = default;
};

inline constexpr ModeId signal_early{ModeRole::SignalEarly};
inline constexpr ModeId signal_late{ModeRole::SignalLate};
inline constexpr ModeId idler_early{ModeRole::IdlerEarly};
inline constexpr ModeId idler_late{ModeRole::IdlerLate};
inline constexpr ModeId input_early{ModeRole::InputEarly};
inline constexpr ModeId input_late{ModeRole::InputLate};
inline constexpr ModeId aux_early{ModeRole::AuxEarly};
inline constexpr ModeId aux_late{ModeRole::AuxLate};

constexpr ModeId ancilla(std::uint8_t tag) { return ModeId{ModeRole::Ancilla, tag}; }

// Partner of a mode in the other time bin; ancillas have none.
constexpr ModeId other_bin(ModeId m) {
    switch (m.role) {
        case ModeRole::SignalEarly: return {ModeRole::SignalLate, m.tag};
        case ModeRole::SignalLate: return {ModeRole::SignalEarly, m.tag};
        case ModeRole::IdlerEarly: return {ModeRole::IdlerLate, m.tag};
        case ModeRole::IdlerLate: return {ModeRole::IdlerEarly, m.tag};
        case ModeRole::InputEarly: return {ModeRole::InputLate, m.tag};
        case ModeRole::InputLate: return {ModeRole::InputEarly, m.tag};
        case ModeRole::AuxEarly: return {ModeRole::AuxLate, m.tag};
        case ModeRole::AuxLate: return {ModeRole::AuxEarly, m.tag};
        case ModeRole::Ancilla: break;
    }
    return m;
}

inline std::string to_string(ModeId m) {
    std::string base;
    switch (m.role) {
        case ModeRole::SignalEarly: base = "s_e"; break;
        case ModeRole::SignalLate: base = "s_l"; break;
        case ModeRole::IdlerEarly: base = "i_e"; break;
        case ModeRole::IdlerLate: base = "i_l"; break;
        case ModeRole::InputEarly: base = "q_e"; break;
        case ModeRole::InputLate: base = "q_l"; break;
        case ModeRole::AuxEarly: base = "a_e"; break;
        case ModeRole::AuxLate: base = "a_l"; break;
        case ModeRole::Ancilla: base = "anc"; break;
    }
    if (m.tag != 0 || m.role == ModeRole::Ancilla) base += "#" + std::to_string(m.tag);
    return base;
}

}  // namespace tmtele::fock

template <>
struct std::hash<tmtele::fock::ModeId> {
    std::size_t operator()(const tmtele::fock::ModeId& m) const noexcept {
        return (static_cast<std::size_t>(m.role) << 8) | m.tag;
    }
};
