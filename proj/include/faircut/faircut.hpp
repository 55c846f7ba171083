#ifndef FAIRCUT_FAIRCUT_HPP
#define FAIRCUT_FAIRCUT_HPP

#include "faircut/busolver.hpp"
#include "faircut/chessboard.hpp"
#include "faircut/counterexamples.hpp"
#include "faircut/errors.hpp"
#include "faircut/geometry.hpp"
#include "faircut/io.hpp"
#include "faircut/measures.hpp"
#include "faircut/necklace1d.hpp"
#include "faircut/nested.hpp"
#include "faircut/oracle.hpp"
#include "faircut/stairpath.hpp"
#include "faircut/svg.hpp"
#include "faircut/voronoifair.hpp"

#endif // FAIRCUT_FAIRCUT_HPP
