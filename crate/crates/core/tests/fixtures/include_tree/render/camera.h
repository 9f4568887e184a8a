#pragma once
#include "renderer.h"

class Camera {};
