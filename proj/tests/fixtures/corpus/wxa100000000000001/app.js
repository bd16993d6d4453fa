App({
  onLaunch() {
    wx.setKeepScreenOn({ keepScreenOn: false });
  },
});
