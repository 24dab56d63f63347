// Deployment knob: point the UI at a service on another origin by
// setting the base URL here (no trailing slash), for example
//   window.SITEGRADE_API_BASE = "https://scores.example.org";
// Leave it unset to call the origin the UI is served from. When the
// service runs elsewhere, set its ui_origin config to this UI's origin
// so the responses carry CORS headers.
window.SITEGRADE_API_BASE = window.SITEGRADE_API_BASE || "";
