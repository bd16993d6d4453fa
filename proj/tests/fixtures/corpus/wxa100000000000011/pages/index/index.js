const app = getApp();

Page({
  onShow() {
    const g = app.globalData;
    wx.request({
      url: 'https://api.tianqi.example.com/now',
      data: { lat: g.location.lat, lng: g.location.lng, ua: g.model },
    });
    wx.request({ url: 'https://api.tianqi.example.com/notice' });
  },
});
