#pragma once

#define EXITSIM_VERSION "0.1.0"
