#!/usr/bin/env node
/** Fixed 3x3 periodic mean-filter denoiser plugin. */

import { blur3x3 } from "./denoisers";
import { serve } from "./server";

serve(blur3x3);
